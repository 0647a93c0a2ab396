"""Lossless grayscale image codec.

Pipeline: integer 5/3 lifting wavelet decomposition, per-subband linear
prediction from causal inter/intra-scale neighbors, DPCM on the coarse
band, and adaptive arithmetic coding of all residuals into a CRC-guarded
container. Decompression is bit-exact.
"""

from ._backend import backend_name
from .codec import CodecConfig, Report, compress, decompress, measure
from .errors import CodecError, CorruptionError, FormatError
from .imgio import GrayImage, make_phantom, read_pgm, write_pgm
from .lifting import Subband, SubbandPyramid, forward, inverse

__version__ = "0.1.0"

__all__ = [
    "CodecConfig", "CodecError", "CorruptionError", "FormatError",
    "GrayImage", "Report", "Subband", "SubbandPyramid", "backend_name",
    "compress", "decompress", "forward", "inverse", "make_phantom",
    "measure", "read_pgm", "write_pgm", "__version__",
]
