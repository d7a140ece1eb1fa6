from itertools import product
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigurationError, DimensionError

# Two-symbol combinations used as one block when M_Rx = 2, in labeling order.
# (b2, b3) is left out so that eight blocks carry three bits.
_PAIR_CODEBOOK: Tuple[Tuple[int, int], ...] = (
    (1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (3, 2), (3, 1), (3, 3)
)


class ZxAlphabet:
    """TI ZX symbol alphabet b_1..b_R with R = M_Rx + 1 and its block codebook"""

    def __init__(self, m_rx: int):
        if m_rx < 1:
            raise ConfigurationError("Oversampling factor M_Rx must be positive")

        size = m_rx + 1
        if size & (size - 1) == 0:
            codebook: Tuple[Tuple[int, ...], ...] = tuple((j,) for j in range(1, size + 1))
        elif m_rx == 2:
            codebook = _PAIR_CODEBOOK
        else:
            raise ConfigurationError(
                f"No Gray block codebook for M_Rx={m_rx}; supported values are 2 and 2**k - 1"
            )

        self.m_rx = int(m_rx)
        self.size = size
        self.block_codebook = codebook
        self.block_symbols = len(codebook[0])
        self.n_bits = int(np.log2(len(codebook)))

    @property
    def symbols(self) -> List[int]:
        return list(range(1, self.size + 1))

    @property
    def bits_per_symbol(self) -> float:
        """n_s: payload bits carried per transmit symbol"""
        return self.n_bits / self.block_symbols

    @property
    def block_length(self) -> int:
        """Samples m of one detection block including the leading sample"""
        return self.m_rx * self.block_symbols + 1

    @property
    def n_blocks(self) -> int:
        return len(self.block_codebook)

    def crossing_interval(self, symbol: int) -> Optional[int]:
        """1-based sub-symbol interval holding the zero crossing of b_symbol (None for b_1)"""
        self.check_symbol(symbol)
        if symbol == 1:
            return None
        return self.m_rx - symbol + 2

    def check_symbol(self, symbol: int) -> None:
        if not 1 <= symbol <= self.size:
            raise ValueError(f"Symbol index {symbol} outside 1..{self.size}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ZxAlphabet):
            return NotImplemented
        return self.m_rx == other.m_rx

    def __hash__(self) -> int:
        return hash(("ZxAlphabet", self.m_rx))

    def __repr__(self) -> str:
        return f"ZxAlphabet(m_rx={self.m_rx}, size={self.size}, block_symbols={self.block_symbols})"


class ZxFrame:
    """A frame of TI ZX symbols together with its binary target pattern c_out"""

    def __init__(
        self,
        symbols: Sequence[int],
        rho0: int,
        c_out: np.ndarray,
        m_rx: int,
        bits: Optional[Sequence[int]] = None
    ):
        if len(symbols) < 1:
            raise DimensionError("Frame must hold at least one symbol")

        if rho0 not in (1, -1):
            raise ValueError("Pilot sample must be +1 or -1")

        pattern = np.array(c_out, dtype=np.int8)
        if pattern.shape != (len(symbols) * m_rx + 1,):
            raise DimensionError(
                f"c_out has length {pattern.size}, expected {len(symbols) * m_rx + 1}"
            )

        if pattern[0] != rho0:
            raise ValueError("c_out must start with the pilot sample")

        pattern.setflags(write=False)
        self.symbols = tuple(int(s) for s in symbols)
        self.rho0 = int(rho0)
        self.c_out = pattern
        self.m_rx = int(m_rx)
        self.bits = tuple(int(b) for b in bits) if bits is not None else None

    @property
    def n_symbols(self) -> int:
        return len(self.symbols)

    def __repr__(self) -> str:
        return f"ZxFrame(symbols={list(self.symbols)}, rho0={self.rho0})"


class DetectedBlock:
    """Result of minimum-Hamming detection of one received block"""

    def __init__(
        self,
        z_block: np.ndarray,
        detected_symbol: int,
        hamming_cost: int,
        tie: bool,
        symbols: Tuple[int, ...],
        rho: int
    ):
        self.z_block = np.array(z_block, dtype=np.int8)
        self.detected_symbol = int(detected_symbol)
        self.hamming_cost = int(hamming_cost)
        self.tie = bool(tie)
        self.symbols = tuple(symbols)
        self.rho = int(rho)

    def __repr__(self) -> str:
        return (f"DetectedBlock(symbol={self.detected_symbol}, cost={self.hamming_cost}, "
                f"tie={self.tie})")


def all_sign_patterns(length: int) -> np.ndarray:
    """Every +-1 vector of the given length, lexicographic with +1 first"""
    return np.array(list(product((1, -1), repeat=length)), dtype=np.int8)
