import os
from typing import Dict, List, Tuple

import numpy as np

from utils.errors import FormatError

CHECKPOINT_MAGIC = b"GNLAB-MLP1\n"
DATASET_MAGIC = b"GNLAB-DS1\n"
ATTRIBUTION_MAGIC = b"GNLAB-ATTR1\n"
HEADER_END = b"end\n"


class FileTypeDetector:
    """Detects lab artifact types from their magic string, falling back to extensions"""

    def __init__(self):
        self.magic_to_type_mapping = {
            CHECKPOINT_MAGIC: 'CHECKPOINT',
            DATASET_MAGIC: 'DATASET',
            ATTRIBUTION_MAGIC: 'ATTRIBUTIONS',
        }

        self.extension_mapping = {
            '.mlp': 'CHECKPOINT',
            '.gnds': 'DATASET',
            '.gnattr': 'ATTRIBUTIONS',
            '.ini': 'CONFIG',
            '.csv': 'CSV',
            '.svg': 'SVG',
            '.pgm': 'GRAYMAP',
        }

    def detect_file_type(self, filepath: str) -> str:
        """Return the artifact type, e.g. 'CHECKPOINT' or 'UNKNOWN'"""
        try:
            with open(filepath, 'rb') as f:
                head = f.read(max(len(m) for m in self.magic_to_type_mapping))
            for magic, file_type in self.magic_to_type_mapping.items():
                if head.startswith(magic):
                    return file_type
        except OSError:
            pass

        _, ext = os.path.splitext(filepath)
        return self.extension_mapping.get(ext.lower(), 'UNKNOWN')


def read_header(buf: bytes, magic: bytes, offset: int = 0) -> Tuple[Dict[str, str], int]:
    """
    Parse `magic` followed by `key=value` lines up to `end`.
    Returns the header dict and the offset of the first payload byte.
    """
    if buf[offset:offset + len(magic)] != magic:
        raise FormatError(f"Bad magic, expected {magic!r}", offset)
    pos = offset + len(magic)
    header: Dict[str, str] = {}
    while True:
        newline = buf.find(b"\n", pos)
        if newline < 0:
            raise FormatError("Header not terminated", pos)
        line = buf[pos:newline + 1]
        if line == HEADER_END:
            return header, newline + 1
        try:
            key, value = line[:-1].decode('utf-8').split('=', 1)
        except ValueError:
            raise FormatError(f"Malformed header line {line!r}", pos)
        header[key.strip()] = value.strip()
        pos = newline + 1


def write_header(fields: List[Tuple[str, object]], magic: bytes) -> bytes:
    lines = [magic]
    for key, value in fields:
        text = str(value)
        if '\n' in text:
            raise ValueError(f"Header value for {key} contains a newline")
        lines.append(f"{key}={text}\n".encode('utf-8'))
    lines.append(HEADER_END)
    return b"".join(lines)


def take_block(buf: bytes, offset: int, dtype: str, count: int) -> Tuple[np.ndarray, int]:
    """Read `count` items of little-endian `dtype` starting at `offset`"""
    item = np.dtype(dtype).itemsize
    end = offset + item * count
    if end > len(buf):
        raise FormatError(f"Truncated block: need {item * count} bytes, have {len(buf) - offset}", offset)
    block = np.frombuffer(buf, dtype=dtype, count=count, offset=offset).copy()
    return block, end


def header_int(header: Dict[str, str], key: str, offset: int) -> int:
    try:
        return int(header[key])
    except (KeyError, ValueError):
        raise FormatError(f"Missing or invalid header field '{key}'", offset)
