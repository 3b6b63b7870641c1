"""
Dataset file: magic "GNLAB-DS1\n", key=value header (n, shape, has_masks, name),
"end\n", then float64 inputs, int32 labels and uint8 masks, all little-endian.
"""

import logging

import numpy as np

from data.dataset import Dataset
from utils.errors import FormatError
from utils.file_detector import DATASET_MAGIC, header_int, read_header, take_block, write_header

logger = logging.getLogger(__name__)


def save_dataset(d: Dataset, path: str):
    header = write_header([
        ('n', len(d)),
        ('shape', ','.join(str(s) for s in d.shape)),
        ('has_masks', int(d.has_masks)),
        ('name', d.name),
    ], DATASET_MAGIC)
    blocks = [header,
              np.ascontiguousarray(d.inputs, dtype='<f8').tobytes(),
              np.ascontiguousarray(d.labels, dtype='<i4').tobytes()]
    if d.has_masks:
        blocks.append(np.ascontiguousarray(d.masks, dtype=np.uint8).tobytes())
    with open(path, 'wb') as f:
        f.write(b"".join(blocks))
    logger.info(f"Saved dataset '{d.name}' ({len(d)} samples) to {path}")


def load_dataset(path: str) -> Dataset:
    with open(path, 'rb') as f:
        buf = f.read()
    header, offset = read_header(buf, DATASET_MAGIC)
    n = header_int(header, 'n', len(DATASET_MAGIC))
    has_masks = header_int(header, 'has_masks', len(DATASET_MAGIC))
    try:
        shape = tuple(int(s) for s in header['shape'].split(','))
    except (KeyError, ValueError):
        raise FormatError("Missing or invalid header field 'shape'", len(DATASET_MAGIC))
    dim = int(np.prod(shape))

    inputs, offset = take_block(buf, offset, '<f8', n * dim)
    labels, offset = take_block(buf, offset, '<i4', n)
    masks = None
    if has_masks:
        masks, offset = take_block(buf, offset, 'u1', n * dim)
        masks = masks.reshape(n, dim)
    if offset != len(buf):
        raise FormatError(f"{len(buf) - offset} trailing bytes", offset)

    return Dataset(inputs.astype(np.float64).reshape(n, dim), labels.astype(np.int64), masks,
                   name=header.get('name', 'dataset'), shape=shape)
