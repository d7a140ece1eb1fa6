from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..models.errors import DimensionError
from ..models.zx import DetectedBlock, ZxAlphabet, ZxFrame
from ..config.logging import get_logger

logger = get_logger(__name__)


class _CandidateTable:
    """All (rho, codeword) candidates of one block length, with their tie-break keys"""

    def __init__(self, words: np.ndarray, labels: np.ndarray, entries: List[Tuple[int, ...]]):
        self.words = words
        self.labels = labels
        self.entries = entries
        self.leads = words[:, 0]
        self.n_labels = len(entries)


class ModulationService:
    """TI ZX mapping, Gray labeling and minimum-Hamming detection"""

    def __init__(self):
        self._tables: Dict[Tuple[int, int], _CandidateTable] = {}

    def codeword(self, symbol: int, rho_prev: int, alphabet: ZxAlphabet) -> np.ndarray:
        """M_Rx samples of symbol b_symbol following the previous sample rho_prev"""
        interval = alphabet.crossing_interval(symbol)
        if rho_prev not in (1, -1):
            raise ValueError("Previous sample must be +1 or -1")

        word = np.full(alphabet.m_rx, rho_prev, dtype=np.int8)
        if interval is not None:
            word[interval - 1:] = -rho_prev
        return word

    def block_codeword(self, block_index: int, rho: int, alphabet: ZxAlphabet) -> np.ndarray:
        """Concatenated codeword of codebook entry block_index (0-based)"""
        if not 0 <= block_index < alphabet.n_blocks:
            raise ValueError(f"Block index {block_index} outside 0..{alphabet.n_blocks - 1}")

        words = []
        last = rho
        for symbol in alphabet.block_codebook[block_index]:
            word = self.codeword(symbol, last, alphabet)
            words.append(word)
            last = int(word[-1])
        return np.concatenate(words)

    def encode(self, symbols: Sequence[int], rho0: int, alphabet: ZxAlphabet) -> ZxFrame:
        """Build c_out = [rho0, codeword(x_1, rho0), codeword(x_2, last sample), ...]"""
        if len(symbols) < 1:
            raise DimensionError("At least one symbol is required")

        pattern = [np.array([rho0], dtype=np.int8)]
        last = rho0
        for symbol in symbols:
            word = self.codeword(symbol, last, alphabet)
            pattern.append(word)
            last = int(word[-1])

        return ZxFrame(symbols, rho0, np.concatenate(pattern), alphabet.m_rx)

    def encode_blocks(self, blocks: np.ndarray, rho0: int, alphabet: ZxAlphabet) -> np.ndarray:
        """c_out rows for many frames given their 0-based codebook indices (frames x blocks)"""
        blocks = np.atleast_2d(np.asarray(blocks, dtype=np.int64))
        if rho0 not in (1, -1):
            raise ValueError("Pilot sample must be +1 or -1")

        symbols = self.codebook_array(alphabet)[blocks].reshape(blocks.shape[0], -1)
        words = self._word_table(alphabet)
        m_rx = alphabet.m_rx

        pattern = np.empty((blocks.shape[0], symbols.shape[1] * m_rx + 1), dtype=np.int8)
        pattern[:, 0] = rho0
        last = np.full(blocks.shape[0], rho0, dtype=np.int8)
        for i in range(symbols.shape[1]):
            word = words[symbols[:, i] - 1, (last < 0).astype(np.int64)]
            pattern[:, 1 + i * m_rx:1 + (i + 1) * m_rx] = word
            last = word[:, -1]
        return pattern

    def bits_to_block_array(self, bits: np.ndarray, alphabet: ZxAlphabet) -> np.ndarray:
        """Vectorized bits_to_blocks over rows of a (frames x payload bits) array"""
        bits = np.atleast_2d(np.asarray(bits, dtype=np.int64))
        width = alphabet.n_bits
        if bits.shape[1] % width != 0:
            raise DimensionError(f"Payload of {bits.shape[1]} bits is not a multiple of {width}")

        weights = 1 << np.arange(width - 1, -1, -1)
        labels = bits.reshape(bits.shape[0], -1, width) @ weights
        inverse = np.array([self._gray_inverse(label) for label in range(alphabet.n_blocks)])
        return inverse[labels]

    def codebook_array(self, alphabet: ZxAlphabet) -> np.ndarray:
        """Codebook entries as an (n_blocks x block_symbols) array of 1-based symbols"""
        return np.array(alphabet.block_codebook, dtype=np.int64)

    def hamming(self, z: np.ndarray, c: np.ndarray) -> int:
        """Half the l1 distance of two sign vectors, i.e. the number of differing positions"""
        return int(np.sum(np.abs(np.asarray(z, dtype=int) - np.asarray(c, dtype=int))) // 2)

    def detect_block(self, z_b: np.ndarray, alphabet: ZxAlphabet) -> DetectedBlock:
        """
        Minimum-Hamming detection of one block whose first entry is the previous sample.

        Accepts a single-symbol block (M_Rx + 1 samples) or a codebook block
        (M_Rx * block_symbols + 1 samples). Ties go to the candidate whose leading
        sample agrees with z_b[0], then to the lowest symbol index.
        """
        z_b = np.asarray(z_b, dtype=np.int8)
        table = self._table_for_length(z_b.size, alphabet)

        costs = np.count_nonzero(table.words != z_b[None, :], axis=1)
        keys = self._keys(costs, table.leads != z_b[0], table)
        best = int(np.argmin(keys))
        label = int(table.labels[best])

        return DetectedBlock(
            z_block=z_b,
            detected_symbol=label + 1,
            hamming_cost=int(costs[best]),
            tie=bool(np.count_nonzero(costs == costs[best]) > 1),
            symbols=table.entries[label],
            rho=int(table.leads[best])
        )

    def detect_labels(self, blocks: np.ndarray, alphabet: ZxAlphabet) -> np.ndarray:
        """Vectorized detect_block over rows of blocks; returns 0-based labels"""
        blocks = np.asarray(blocks, dtype=np.int8)
        table = self._table_for_length(blocks.shape[-1], alphabet)

        costs = np.count_nonzero(blocks[:, None, :] != table.words[None, :, :], axis=2)
        mismatch = blocks[:, :1] != table.leads[None, :]
        keys = self._keys(costs, mismatch, table)
        return table.labels[np.argmin(keys, axis=1)]

    def detect(self, z: np.ndarray, alphabet: ZxAlphabet) -> List[int]:
        """Sequential per-symbol detection using each block's own first sample as rho"""
        z = np.asarray(z, dtype=np.int8)
        n_symbols = self._frame_symbols(z.size, alphabet.m_rx)

        m_rx = alphabet.m_rx
        starts = np.arange(n_symbols) * m_rx
        blocks = np.stack([z[s:s + m_rx + 1] for s in starts])
        return [int(label) + 1 for label in self.detect_labels(blocks, alphabet)]

    def detect_blocks(self, z: np.ndarray, alphabet: ZxAlphabet) -> List[int]:
        """Sequential block-level detection of a frame; returns 0-based codebook indices"""
        z = np.atleast_2d(np.asarray(z, dtype=np.int8))
        labels = self.detect_frames(z, alphabet)
        return [int(label) for label in labels[0]]

    def detect_frames(self, frames: np.ndarray, alphabet: ZxAlphabet) -> np.ndarray:
        """Block-level detection of many frames at once (rows of frames)"""
        frames = np.asarray(frames, dtype=np.int8)
        n_symbols = self._frame_symbols(frames.shape[1], alphabet.m_rx)
        if n_symbols % alphabet.block_symbols != 0:
            raise DimensionError(
                f"N={n_symbols} is not a multiple of the block size {alphabet.block_symbols}"
            )

        step = alphabet.m_rx * alphabet.block_symbols
        n_blocks = n_symbols // alphabet.block_symbols
        labels = np.empty((frames.shape[0], n_blocks), dtype=np.int64)
        for b in range(n_blocks):
            labels[:, b] = self.detect_labels(frames[:, b * step:(b + 1) * step + 1], alphabet)
        return labels

    def gray_label(self, block_index: int) -> int:
        return block_index ^ (block_index >> 1)

    def gray_encode(self, bits: Sequence[int], alphabet: ZxAlphabet) -> List[int]:
        """Map payload bits to symbols, n_bits per codebook block (MSB first)"""
        blocks = self.bits_to_blocks(bits, alphabet)
        return [s for index in blocks for s in alphabet.block_codebook[index]]

    def gray_decode(self, symbols: Sequence[int], alphabet: ZxAlphabet) -> List[int]:
        """Inverse of gray_encode"""
        size = alphabet.block_symbols
        if len(symbols) % size != 0:
            raise DimensionError(f"{len(symbols)} symbols do not form whole blocks of {size}")

        lookup = {entry: index for index, entry in enumerate(alphabet.block_codebook)}
        indices = []
        for start in range(0, len(symbols), size):
            entry = tuple(int(s) for s in symbols[start:start + size])
            if entry not in lookup:
                raise ValueError(f"Symbol block {entry} is not a codebook entry")
            indices.append(lookup[entry])
        return self.blocks_to_bits(indices, alphabet)

    def bits_to_blocks(self, bits: Sequence[int], alphabet: ZxAlphabet) -> List[int]:
        width = alphabet.n_bits
        if len(bits) % width != 0:
            raise DimensionError(f"Payload of {len(bits)} bits is not a multiple of {width}")

        indices = []
        for start in range(0, len(bits), width):
            label = 0
            for bit in bits[start:start + width]:
                if bit not in (0, 1):
                    raise ValueError(f"Invalid bit value: {bit}")
                label = (label << 1) | int(bit)
            indices.append(self._gray_inverse(label))
        return indices

    def blocks_to_bits(self, indices: Sequence[int], alphabet: ZxAlphabet) -> List[int]:
        width = alphabet.n_bits
        bits = []
        for index in indices:
            label = self.gray_label(int(index))
            bits.extend((label >> shift) & 1 for shift in range(width - 1, -1, -1))
        return bits

    def label_bit_table(self, alphabet: ZxAlphabet) -> np.ndarray:
        """Bit rows of each codebook entry's Gray label (n_blocks x n_bits)"""
        return np.array(
            [self.blocks_to_bits([i], alphabet) for i in range(alphabet.n_blocks)],
            dtype=np.int8
        ).reshape(alphabet.n_blocks, alphabet.n_bits)

    def _gray_inverse(self, label: int) -> int:
        index = label
        shift = label >> 1
        while shift:
            index ^= shift
            shift >>= 1
        return index

    def _word_table(self, alphabet: ZxAlphabet) -> np.ndarray:
        # (symbol - 1, rho index with 0 for +1) -> codeword
        return np.array(
            [[self.codeword(symbol, rho, alphabet) for rho in (1, -1)] for symbol in alphabet.symbols],
            dtype=np.int8
        )

    def _keys(self, costs: np.ndarray, mismatch: np.ndarray, table: _CandidateTable) -> np.ndarray:
        return (costs * 2 + mismatch.astype(np.int64)) * table.n_labels + table.labels

    def _frame_symbols(self, length: int, m_rx: int) -> int:
        if length < m_rx + 1 or (length - 1) % m_rx != 0:
            raise DimensionError(f"Frame length {length} is not N*M_Rx + 1 for M_Rx={m_rx}")
        return (length - 1) // m_rx

    def _table_for_length(self, length: int, alphabet: ZxAlphabet) -> _CandidateTable:
        if length == alphabet.m_rx + 1:
            block_symbols = 1
        elif length == alphabet.block_length:
            block_symbols = alphabet.block_symbols
        else:
            raise DimensionError(
                f"Block of {length} samples; expected {alphabet.m_rx + 1} or {alphabet.block_length}"
            )

        key = (alphabet.m_rx, block_symbols)
        if key not in self._tables:
            self._tables[key] = self._build_table(alphabet, block_symbols)
        return self._tables[key]

    def _build_table(self, alphabet: ZxAlphabet, block_symbols: int) -> _CandidateTable:
        if block_symbols == 1:
            entries = [(j,) for j in alphabet.symbols]
        else:
            entries = list(alphabet.block_codebook)

        words, labels = [], []
        for rho in (1, -1):
            for label, entry in enumerate(entries):
                word = [rho]
                last = rho
                for symbol in entry:
                    part = self.codeword(symbol, last, alphabet)
                    word.extend(int(s) for s in part)
                    last = int(part[-1])
                words.append(word)
                labels.append(label)

        logger.debug("Candidate table built", m_rx=alphabet.m_rx, candidates=len(words))
        return _CandidateTable(np.array(words, dtype=np.int8), np.array(labels), entries)
