import io
import os
import pathlib
import re

from setuptools import find_namespace_packages, setup

# The directory containing this file
HERE = pathlib.Path(__file__).parent

# Package meta-data.
NAME = "quantuminfolab"
DESCRIPTION = "Multipartite quantum-state simulations through directed entanglement"
AUTHOR = "quantuminfolab developers"
REQUIRES_PYTHON = ">=3.10"
# What packages are required for this module to be executed?
REQUIRED = [
    "numpy>=1.24",
    "scipy>=1.10",
    "tqdm",
]


# What packages are optional?
EXTRAS = {
    "dev": ["isort", "black"],
    "test": ["pytest", "pytest-cov", "python-dotenv"],
}


def get_version():
    init = open(os.path.join(HERE, "quantuminfolab", "__init__.py")).read()
    return (
        re.compile(r"""__version__ = ['"]([0-9.]+)['"]""")
        .search(init)
        .group(1)
    )


VERSION = get_version()


try:
    with io.open((HERE / "README.md"), encoding="utf-8") as f:
        LONG_DESCRIPTION = "\n" + f.read()
except FileNotFoundError:
    LONG_DESCRIPTION = DESCRIPTION

setup(
    name=NAME,
    version=VERSION,
    author=AUTHOR,
    description=DESCRIPTION,
    long_description=LONG_DESCRIPTION,
    long_description_content_type="text/markdown",
    license="MIT",
    python_requires=REQUIRES_PYTHON,
    packages=find_namespace_packages(include=["quantuminfolab"]),
    install_requires=REQUIRED,
    extras_require=EXTRAS,
    entry_points={
        "console_scripts": ["quantuminfolab=quantuminfolab.cli:main"],
    },
    include_package_data=True,
    keywords=[
        "quantum information",
        "directed entanglement",
        "coherent information",
        "Holevo bound",
        "von Neumann entropy",
        "density matrix",
        "Python",
    ],
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Natural Language :: English",
        "Programming Language :: Python",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering :: Physics",
        "Operating System :: OS Independent",
        "License :: OSI Approved :: MIT License",
    ],
)
