def fnv1_32(data: bytes) -> int: ...
def fnv1a_32(data: bytes) -> int: ...
def fnv1_64(data: bytes) -> int: ...
def fnv1a_64(data: bytes) -> int: ...
