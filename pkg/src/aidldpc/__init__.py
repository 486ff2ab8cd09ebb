"""LDPC coding, belief-propagation decoding and adaptive iteration capping for low-power links."""

__version__ = "0.1.0"

from .code import (  # noqa: E402
    CodeError,
    Encoder,
    LdpcCode,
    ParityCheckMatrix,
    build_encoder,
    code_from_spec,
    encode,
    gallager_regular,
    gf2_rank,
    example_h,
    read_alist,
    syndrome,
    write_alist,
)
from .decoder import DecodeResult, DecoderConfig, LlrState, decode, decode_flooding, psi  # noqa: E402
from .channel import ChannelConfig, q_function, transmit, uncoded_ber  # noqa: E402
from .energy import EnergyParams  # noqa: E402
from .aid import AidProfile, calibrate, decode_with_profile, savings_report  # noqa: E402
