"""FNV-1a digests used for schema and manifold identifiers."""

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    value = FNV_OFFSET
    for byte in data:
        value ^= byte
        value = (value * FNV_PRIME) & _MASK
    return value


def digest(text: str) -> str:
    """Return the 16-hex-digit FNV-1a digest of a UTF-8 string."""
    return f"{fnv1a64(text.encode('utf-8')):016X}"
