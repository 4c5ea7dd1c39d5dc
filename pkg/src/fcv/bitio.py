"""Bit-level I/O and the two lossless coders used by the codec.

Conventions (shared by every consumer of this module):

* bits are written most-significant-bit first,
* multi-bit integers are big-endian within the bit sequence,
* Huffman tables are canonical: codes are assigned in (length, symbol)
  order, so a table is fully reconstructible from its code lengths.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .errors import CorruptStreamError, ParameterError, TruncatedStreamError

BLOCK_COEFFS = 64


class BitBuffer:
    """Append-only bit sequence with an independent read cursor.

    Writes go to the end of the buffer; `get_bits` consumes from the read
    cursor, which starts at bit 0.  The logical bit sequence is the flushed
    bytes followed by up to 7 pending tail bits.
    """

    __slots__ = ("_bytes", "_acc", "_nacc", "_read_pos")

    def __init__(self, data: bytes | None = None, bit_length: int | None = None):
        self._bytes = bytearray(data or b"")
        self._acc = 0
        self._nacc = 0
        self._read_pos = 0
        if bit_length is not None:
            if not 0 <= bit_length <= 8 * len(self._bytes):
                raise ParameterError("bit_length outside the supplied bytes")
            drop = 8 * len(self._bytes) - bit_length
            if drop:
                # reinterpret the tail byte as pending bits
                last = self._bytes.pop()
                self._acc = last >> drop
                self._nacc = 8 - drop

    @property
    def bit_length(self) -> int:
        return 8 * len(self._bytes) + self._nacc

    @property
    def bit_cursor(self) -> int:
        return self._read_pos

    def remaining(self) -> int:
        return self.bit_length - self._read_pos

    def put_bits(self, value: int, n: int) -> "BitBuffer":
        if not 1 <= n <= 32:
            raise ParameterError(f"bit count must be in 1..=32, got {n}")
        if not 0 <= value < (1 << n):
            raise ParameterError(f"value {value} does not fit in {n} bits")
        acc = (self._acc << n) | value
        nacc = self._nacc + n
        while nacc >= 8:
            nacc -= 8
            self._bytes.append((acc >> nacc) & 0xFF)
        self._acc = acc & ((1 << nacc) - 1)
        self._nacc = nacc
        return self

    def get_bits(self, n: int) -> int:
        if not 1 <= n <= 32:
            raise ParameterError(f"bit count must be in 1..=32, got {n}")
        pos = self._read_pos
        end = pos + n
        if end > self.bit_length:
            raise TruncatedStreamError(
                f"need {n} bits, {self.bit_length - pos} remain", bit_offset=pos
            )
        first = pos >> 3
        if end <= 8 * len(self._bytes):
            last = (end + 7) >> 3
            window = int.from_bytes(self._bytes[first:last], "big")
            shift = 8 * (last - first) - (pos - 8 * first) - n
        else:
            window = (int.from_bytes(self._bytes[first:], "big") << self._nacc) | self._acc
            shift = 8 * (len(self._bytes) - first) + self._nacc - (pos - 8 * first) - n
        self._read_pos = end
        return (window >> shift) & ((1 << n) - 1)

    def seek(self, bit_pos: int):
        if not 0 <= bit_pos <= self.bit_length:
            raise ParameterError("seek outside buffer")
        self._read_pos = bit_pos

    def flush(self) -> int:
        """Zero-pad to a byte boundary; returns the number of pad bits."""
        pad = (8 - self._nacc) % 8
        if pad:
            self.put_bits(0, pad)
        return pad

    def to_bytes(self) -> bytes:
        if self._nacc:
            raise ParameterError("buffer not byte-aligned; call flush() first")
        return bytes(self._bytes)


@dataclass(frozen=True)
class HuffmanTable:
    """Canonical prefix-free code over a sortable symbol alphabet."""

    codes: dict  # symbol -> (code, length)
    max_code_len: int

    @classmethod
    def from_frequencies(cls, freqs: dict, max_len: int | None = None) -> "HuffmanTable":
        """Optimal prefix code for `freqs`; lengths capped at `max_len` if given."""
        items = [(s, c) for s, c in freqs.items() if c > 0]
        if not items:
            raise ParameterError("at least one symbol with nonzero count required")
        lengths = _huffman_code_lengths(dict(items))
        if max_len is not None and max(lengths.values()) > max_len:
            lengths = _limit_code_lengths(lengths, dict(items), max_len)
        return cls.from_code_lengths(lengths)

    @classmethod
    def from_code_lengths(cls, lengths: dict) -> "HuffmanTable":
        """Rebuild the canonical table from symbol -> code length."""
        items = sorted((l, s) for s, l in lengths.items() if l > 0)
        if not items:
            raise ParameterError("no coded symbols")
        if sum(2.0 ** -l for l, _ in items) > 1.0 + 1e-12:
            raise CorruptStreamError("code lengths violate the Kraft inequality")
        codes = {}
        code = 0
        prev_len = items[0][0]
        for length, sym in items:
            code <<= length - prev_len
            codes[sym] = (code, length)
            code += 1
            prev_len = length
        return cls(codes=codes, max_code_len=items[-1][0])

    def code_lengths(self) -> dict:
        return {s: l for s, (_, l) in self.codes.items()}

    def decode_lut(self) -> list:
        """Full lookup table over max_code_len-bit prefixes.

        Entry = (symbol_index << 8) | code_length packed into one int, with
        symbol_index pointing into `lut_symbols()`.  0 marks an invalid prefix.
        Only built for tables with max_code_len <= 16.
        """
        L = self.max_code_len
        if L > 16:
            raise ParameterError("lookup decode requires code lengths <= 16")
        lut = [0] * (1 << L)
        for idx, (sym, (code, length)) in enumerate(sorted(self.codes.items())):
            lo = code << (L - length)
            hi = (code + 1) << (L - length)
            lut[lo:hi] = [(idx << 8) | length] * (hi - lo)
        return lut

    def lut_symbols(self) -> list:
        return [sym for sym, _ in sorted(self.codes.items())]


def _huffman_code_lengths(freqs: dict) -> dict:
    symbols = sorted(freqs)
    if len(symbols) == 1:
        return {symbols[0]: 1}
    # heap of (weight, tiebreak, leaves); tiebreak keeps builds deterministic
    heap = [(freqs[s], i, [s]) for i, s in enumerate(symbols)]
    heapq.heapify(heap)
    depth = {s: 0 for s in symbols}
    counter = len(symbols)
    while len(heap) > 1:
        w1, _, l1 = heapq.heappop(heap)
        w2, _, l2 = heapq.heappop(heap)
        for s in l1 + l2:
            depth[s] += 1
        heapq.heappush(heap, (w1 + w2, counter, l1 + l2))
        counter += 1
    return depth


def _limit_code_lengths(lengths: dict, freqs: dict, max_len: int) -> dict:
    """Cap code lengths at max_len, JPEG-style histogram rebalancing."""
    hist = {}
    for l in lengths.values():
        hist[l] = hist.get(l, 0) + 1
    for i in range(max(hist), max_len, -1):
        while hist.get(i, 0) > 0:
            j = i - 2
            while hist.get(j, 0) == 0:
                j -= 1
            hist[i] -= 2
            hist[i - 1] = hist.get(i - 1, 0) + 1
            hist[j] -= 1
            hist[j + 1] = hist.get(j + 1, 0) + 2
    # shortest codes to the most frequent symbols; symbol order breaks ties
    ordered = sorted(lengths, key=lambda s: (-freqs[s], s))
    out_lengths = sorted(
        (l for l, n in hist.items() for _ in range(n) if n > 0)
    )
    return dict(zip(ordered, out_lengths))


def huffman_encode(table: HuffmanTable, symbols) -> BitBuffer:
    buf = BitBuffer()
    codes = table.codes
    for sym in symbols:
        try:
            code, length = codes[sym]
        except KeyError:
            raise ParameterError(f"symbol {sym!r} not in Huffman table") from None
        while length > 32:
            buf.put_bits((code >> (length - 32)) & 0xFFFFFFFF, 32)
            length -= 32
        buf.put_bits(code & ((1 << length) - 1), length)
    return buf


def huffman_decode(table: HuffmanTable, buf: BitBuffer, count: int) -> list:
    by_len = {}
    for sym, (code, length) in table.codes.items():
        by_len.setdefault(length, {})[code] = sym
    out = []
    code = 0
    length = 0
    while len(out) < count:
        code = (code << 1) | buf.get_bits(1)
        length += 1
        bucket = by_len.get(length)
        if bucket is not None and code in bucket:
            out.append(bucket[code])
            code = 0
            length = 0
        elif length > table.max_code_len:
            raise CorruptStreamError(
                "bit pattern matches no codeword", bit_offset=buf.bit_cursor
            )
    return out


@dataclass
class RleSequence:
    """(zero-run, nonzero level) pairs; the end-of-block marker is implicit
    and always terminates the sequence."""

    pairs: list = field(default_factory=list)


def rle_encode(coeffs) -> RleSequence:
    if len(coeffs) != BLOCK_COEFFS:
        raise ParameterError(f"expected {BLOCK_COEFFS} coefficients, got {len(coeffs)}")
    pairs = []
    run = 0
    for c in coeffs:
        c = int(c)
        if c == 0:
            run += 1
        else:
            pairs.append((run, c))
            run = 0
    return RleSequence(pairs=pairs)


def rle_decode(seq: RleSequence) -> list:
    out = []
    for run, level in seq.pairs:
        if level == 0:
            raise CorruptStreamError("zero level inside run-length pair")
        if run < 0:
            raise CorruptStreamError("negative zero-run")
        out.extend([0] * run)
        out.append(int(level))
        if len(out) > BLOCK_COEFFS:
            raise CorruptStreamError(
                f"run-length expansion exceeds {BLOCK_COEFFS} coefficients"
            )
    out.extend([0] * (BLOCK_COEFFS - len(out)))
    return out
