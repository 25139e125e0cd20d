# Tests package for quantuminfolab
