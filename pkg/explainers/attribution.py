"""
Attribution records and the concatenable attribution archive.

Each record: magic "GNLAB-ATTR1\n", key=value provenance lines, "end\n",
then `size` little-endian float64 post-abs values followed by `size` pre-abs values.
"""

import json
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Tuple

import numpy as np

from utils.errors import DimensionError
from utils.file_detector import ATTRIBUTION_MAGIC, header_int, read_header, take_block, write_header

METHODS = ('saliency', 'intgrad', 'gradshap', 'occlusion', 'lrp_gamma')
ENHANCERS = ('none', 'sg', 'ng', 'fg')


@dataclass
class Attribution:
    values: np.ndarray                 # post-abs relevances, input shape
    raw: np.ndarray                    # signed relevances before abs
    method: str
    enhancer: str = 'none'
    config_snapshot: Optional[Dict[str, Any]] = None
    seed_used: Optional[int] = None
    shape: Tuple[int, ...] = ()
    record_id: str = ''
    extra: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.values.shape != self.raw.shape:
            raise DimensionError("values and raw attributions differ in shape")
        if not self.shape:
            self.shape = self.values.shape

    def as_image(self) -> np.ndarray:
        return self.values.reshape(self.shape)


def write_attributions(path: str, attributions: Iterable[Attribution], append: bool = False):
    with open(path, 'ab' if append else 'wb') as f:
        for attr in attributions:
            header = write_header([
                ('id', attr.record_id),
                ('method', attr.method),
                ('enhancer', attr.enhancer),
                ('seed', '' if attr.seed_used is None else attr.seed_used),
                ('shape', ','.join(str(s) for s in attr.shape)),
                ('size', attr.values.size),
                ('config', json.dumps(attr.config_snapshot, sort_keys=True)),
            ], ATTRIBUTION_MAGIC)
            f.write(header)
            f.write(np.ascontiguousarray(attr.values, dtype='<f8').tobytes())
            f.write(np.ascontiguousarray(attr.raw, dtype='<f8').tobytes())


def read_attributions(path: str) -> List[Attribution]:
    with open(path, 'rb') as f:
        buf = f.read()
    records = []
    offset = 0
    while offset < len(buf):
        start = offset
        header, offset = read_header(buf, ATTRIBUTION_MAGIC, offset)
        size = header_int(header, 'size', start)
        values, offset = take_block(buf, offset, '<f8', size)
        raw, offset = take_block(buf, offset, '<f8', size)
        shape = tuple(int(s) for s in header['shape'].split(',')) if header.get('shape') else (size,)
        seed = header.get('seed')
        records.append(Attribution(
            values=values.astype(np.float64), raw=raw.astype(np.float64),
            method=header.get('method', ''), enhancer=header.get('enhancer', 'none'),
            config_snapshot=json.loads(header.get('config', 'null')),
            seed_used=int(seed) if seed else None, shape=shape, record_id=header.get('id', '')))
    return records
