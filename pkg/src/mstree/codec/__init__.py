from mstree.codec.image import (
    CompactFormatError,
    CompactImage,
    decode,
    encode,
    lookup,
    read_image,
)
from mstree.codec.size_model import SizeParams, size_breakdown, size_params

__all__ = [
    "CompactFormatError",
    "CompactImage",
    "SizeParams",
    "decode",
    "encode",
    "lookup",
    "read_image",
    "size_breakdown",
    "size_params",
]
