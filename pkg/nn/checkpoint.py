"""
Checkpoint file: magic "GNLAB-MLP1\n", key=value header lines, "end\n",
then per layer the little-endian float64 weight (row-major) and bias blocks.
"""

import logging

import numpy as np

from nn.model import DenseLayer, MlpModel
from utils.errors import FormatError, GnlabError
from utils.file_detector import CHECKPOINT_MAGIC, header_int, read_header, take_block, write_header

logger = logging.getLogger(__name__)


def save_checkpoint(model: MlpModel, path: str):
    fields = [('layers', len(model.layers))]
    for i, layer in enumerate(model.layers):
        fields.append((f'layer{i}', f"{layer.out_dim} {layer.in_dim} {layer.activation}"))
    blocks = [write_header(fields, CHECKPOINT_MAGIC)]
    for layer in model.layers:
        blocks.append(np.ascontiguousarray(layer.weight, dtype='<f8').tobytes())
        blocks.append(np.ascontiguousarray(layer.bias, dtype='<f8').tobytes())
    with open(path, 'wb') as f:
        f.write(b"".join(blocks))
    logger.info(f"Saved checkpoint {path} ({model})")


def load_checkpoint(path: str) -> MlpModel:
    with open(path, 'rb') as f:
        buf = f.read()
    header, offset = read_header(buf, CHECKPOINT_MAGIC)
    n_layers = header_int(header, 'layers', len(CHECKPOINT_MAGIC))

    layers = []
    for i in range(n_layers):
        spec = header.get(f'layer{i}', '').split()
        if len(spec) != 3:
            raise FormatError(f"Missing or invalid layer{i} description", len(CHECKPOINT_MAGIC))
        try:
            out_dim, in_dim, activation = int(spec[0]), int(spec[1]), spec[2]
        except ValueError:
            raise FormatError(f"Invalid dimensions in layer{i} description", len(CHECKPOINT_MAGIC))
        weight, offset = take_block(buf, offset, '<f8', out_dim * in_dim)
        bias, offset = take_block(buf, offset, '<f8', out_dim)
        layers.append(DenseLayer(weight.reshape(out_dim, in_dim).astype(np.float64), bias.astype(np.float64), activation))
    if offset != len(buf):
        raise FormatError(f"{len(buf) - offset} trailing bytes after last layer", offset)

    try:
        return MlpModel(layers)
    except GnlabError as e:
        raise FormatError(f"Checkpoint describes an invalid model: {e}", len(CHECKPOINT_MAGIC))
