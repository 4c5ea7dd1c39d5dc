"""Symbol-level coding of coefficient blocks and motion vectors.

Coefficients use (zero-run, magnitude-category) symbols followed by raw
magnitude bits; a bare end-of-block symbol closes every block and a
zero-run-of-16 symbol splits longer runs.  Motion-vector deltas use one
joint symbol holding the magnitude categories of both components followed
by the two raw-bit fields.

The decode loops below are the toolkit's hot path: they keep all bit
state in local integers and use flat lookup tables, because extracting
features by entropy decode alone is the whole point of the stream layout.
"""

import numpy as np

from ..bitio import HuffmanTable
from ..errors import CorruptStreamError, TruncatedStreamError

EOB = 0x00
ZRL = 0xF0
COEF_ALPHABET = 256
MV_ALPHABET = 256


def magnitude_category(value: int) -> int:
    """Bit length of |value|; 0 only for value == 0."""
    return abs(value).bit_length()


def magnitude_bits(value: int, size: int) -> int:
    """One's-complement style mapping of a nonzero value to `size` raw bits."""
    return value if value > 0 else value + (1 << size) - 1


def magnitude_value(bits: int, size: int) -> int:
    if bits >> (size - 1):
        return bits
    return bits - (1 << size) + 1


class BitSink:
    """MSB-first bit accumulator used by the encoder."""

    __slots__ = ("buf", "acc", "nbits")

    def __init__(self):
        self.buf = bytearray()
        self.acc = 0
        self.nbits = 0

    def put(self, value, n):
        acc = (self.acc << n) | value
        nbits = self.nbits + n
        buf = self.buf
        while nbits >= 8:
            nbits -= 8
            buf.append((acc >> nbits) & 0xFF)
        self.acc = acc & ((1 << nbits) - 1)
        self.nbits = nbits

    def finish(self):
        """Byte-align with zero bits; returns (payload, pad_bits)."""
        pad = (8 - self.nbits) % 8
        if pad:
            self.put(0, pad)
        return bytes(self.buf), pad

    def bit_length(self):
        return 8 * len(self.buf) + self.nbits


class BitSource:
    """MSB-first bit reader over a byte payload with a known pad count."""

    __slots__ = ("data", "pos", "acc", "nbits", "limit")

    def __init__(self, data: bytes, pad_bits: int = 0):
        self.data = data
        self.pos = 0
        self.acc = 0
        self.nbits = 0
        self.limit = 8 * len(data) - pad_bits

    def consumed(self):
        return 8 * self.pos - self.nbits

    def _refill(self, need):
        # past the payload end we keep counting virtual zero bytes so that
        # consumed() stays truthful and limit checks catch overruns
        data = self.data
        pos = self.pos
        acc = self.acc
        nbits = self.nbits
        n = len(data)
        while nbits < need:
            acc = (acc << 8) | (data[pos] if pos < n else 0)
            pos += 1
            nbits += 8
        self.pos = pos
        self.acc = acc
        self.nbits = nbits

    def read(self, n):
        if self.consumed() + n > self.limit:
            raise TruncatedStreamError("payload exhausted", bit_offset=self.consumed())
        if self.nbits < n:
            self._refill(n)
        self.nbits -= n
        val = (self.acc >> self.nbits) & ((1 << n) - 1)
        self.acc &= (1 << self.nbits) - 1
        return val


def build_encode_table(table: HuffmanTable, alphabet_size: int):
    """symbol -> (code << 6) | length, packed; None for absent symbols."""
    enc = [None] * alphabet_size
    for sym, (code, length) in table.codes.items():
        enc[sym] = (code << 6) | length
    return enc


def build_decode_table(table: HuffmanTable):
    """(lut, width): lut maps a width-bit prefix to (symbol << 8) | length."""
    width = table.max_code_len
    lut = [0] * (1 << width)
    for sym, (code, length) in table.codes.items():
        lo = code << (width - length)
        hi = (code + 1) << (width - length)
        lut[lo:hi] = [(sym << 8) | length] * (hi - lo)
    return lut, width


def encode_block(sink: BitSink, enc_coef, bands, values):
    """One block's nonzero (zigzag band, value) pairs, closed by EOB."""
    put = sink.put
    prev = -1
    for band, value in zip(bands, values):
        run = band - prev - 1
        prev = band
        while run >= 16:
            packed = enc_coef[ZRL]
            put(packed >> 6, packed & 63)
            run -= 16
        # codeword and magnitude bits fused into one write
        size = value.bit_length() if value > 0 else (-value).bit_length()
        bits = value if value > 0 else value + (1 << size) - 1
        packed = enc_coef[(run << 4) | size]
        put(((packed >> 6) << size) | bits, (packed & 63) + size)
    packed = enc_coef[EOB]
    put(packed >> 6, packed & 63)


def encode_mv_delta(sink: BitSink, enc_mv, ddx, ddy):
    sx = magnitude_category(ddx)
    sy = magnitude_category(ddy)
    packed = enc_mv[(sx << 4) | sy]
    sink.put(packed >> 6, packed & 63)
    if sx:
        sink.put(magnitude_bits(ddx, sx), sx)
    if sy:
        sink.put(magnitude_bits(ddy, sy), sy)


_MASKS = tuple((1 << n) - 1 for n in range(64))

# a symbol consumes at most max_code_len (<=16) code bits plus 15 magnitude
# bits; refilling once past that bound keeps the hot loop branch-light
_REFILL_BITS = 31


def decode_blocks(src: BitSource, lut, width, n_blocks, keep=True):
    """Decode `n_blocks` coefficient blocks from the source.

    With keep=True returns (block_ids, bands, values) int32 arrays of the
    nonzero coefficients; with keep=False the symbols are still consumed
    (the stream carries no block lengths) but nothing is materialized.
    Overrun against the payload limit is checked per block: past the end
    the reader sees zero bits, which decode to bounded garbage before the
    check fires.
    """
    out_blocks = [] if keep else None
    out_bands = [] if keep else None
    out_vals = [] if keep else None
    data = src.data
    pos = src.pos
    acc = src.acc
    nbits = src.nbits
    limit = src.limit
    ndata = len(data)
    masks = _MASKS
    mask_w = masks[width]
    for blk in range(n_blocks):
        band = 0
        while True:
            if nbits < _REFILL_BITS:
                while nbits < _REFILL_BITS:
                    acc = (acc << 8) | (data[pos] if pos < ndata else 0)
                    pos += 1
                    nbits += 8
            entry = lut[(acc >> (nbits - width)) & mask_w]
            length = entry & 0xFF
            if length == 0:
                src.pos, src.acc, src.nbits = pos, acc, nbits
                raise CorruptStreamError(
                    "bit pattern matches no coefficient codeword",
                    bit_offset=src.consumed(),
                )
            nbits -= length
            sym = entry >> 8
            if sym == EOB:
                acc &= masks[nbits]
                break
            if sym == ZRL:
                band += 16
                if band > 64:
                    src.pos, src.acc, src.nbits = pos, acc, nbits
                    raise CorruptStreamError(
                        "coefficient block expands past 64 entries",
                        bit_offset=src.consumed(),
                    )
            else:
                band += sym >> 4
                if band > 63:
                    src.pos, src.acc, src.nbits = pos, acc, nbits
                    raise CorruptStreamError(
                        "coefficient block expands past 64 entries",
                        bit_offset=src.consumed(),
                    )
                size = sym & 0xF
                nbits -= size
                if keep:
                    bits = (acc >> nbits) & masks[size]
                    out_blocks.append(blk)
                    out_bands.append(band)
                    if bits >> (size - 1):
                        out_vals.append(bits)
                    else:
                        out_vals.append(bits - (1 << size) + 1)
                acc &= masks[nbits]
                band += 1
        if 8 * pos - nbits > limit:
            src.pos, src.acc, src.nbits = pos, acc, nbits
            raise TruncatedStreamError(
                "payload exhausted inside a coefficient block",
                bit_offset=src.consumed(),
            )
    src.pos, src.acc, src.nbits = pos, acc, nbits
    if not keep:
        return None
    return (
        np.asarray(out_blocks, dtype=np.int32),
        np.asarray(out_bands, dtype=np.int32),
        np.asarray(out_vals, dtype=np.int32),
    )


def decode_mv_delta(src: BitSource, lut, width):
    if src.nbits < width:
        src._refill(width)
    entry = lut[(src.acc >> (src.nbits - width)) & ((1 << width) - 1)]
    length = entry & 0xFF
    if length == 0:
        raise CorruptStreamError(
            "bit pattern matches no motion codeword", bit_offset=src.consumed()
        )
    src.nbits -= length
    src.acc &= (1 << src.nbits) - 1
    if src.consumed() > src.limit:
        raise TruncatedStreamError("payload exhausted", bit_offset=src.consumed())
    sym = entry >> 8
    sx = sym >> 4
    sy = sym & 0xF
    ddx = magnitude_value(src.read(sx), sx) if sx else 0
    ddy = magnitude_value(src.read(sy), sy) if sy else 0
    return ddx, ddy


def block_symbol_frequencies(block_ids, bands, values, n_blocks):
    """Vectorized (run, size) symbol histogram plus ZRL/EOB counts.

    Mirrors encode_block exactly; used to build the coefficient Huffman
    table in one pass without materializing the symbol stream.
    """
    freqs = np.zeros(COEF_ALPHABET, dtype=np.int64)
    freqs[EOB] = n_blocks
    if len(bands):
        bands = np.asarray(bands, dtype=np.int64)
        prev = np.empty_like(bands)
        prev[0] = -1
        prev[1:] = np.where(np.diff(np.asarray(block_ids)) == 0, bands[:-1], -1)
        runs = bands - prev - 1
        freqs[ZRL] += int(np.sum(runs // 16))
        sizes = np.frexp(np.abs(values).astype(np.float64))[1]
        syms = ((runs % 16) << 4) | sizes
        freqs += np.bincount(syms, minlength=COEF_ALPHABET)
    return freqs


def mv_symbol_frequencies(deltas):
    freqs = np.zeros(MV_ALPHABET, dtype=np.int64)
    for ddx, ddy in deltas:
        freqs[(magnitude_category(ddx) << 4) | magnitude_category(ddy)] += 1
    return freqs
