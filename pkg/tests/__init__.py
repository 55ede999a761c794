# Tests package for qkz
