"""Baseline sequential JFIF bitstream reader and writer.

Scope is deliberately narrow: 8-bit samples, three components, 1x1
sampling, Huffman coding. The encoder always emits the standard "typical"
Huffman tables and never emits restart markers; the parser additionally
skips APPn/COM segments and honors restart markers (with the required DC
prediction reset). Coefficients travel as :class:`~jpegkit.codec.CoefficientGrid`,
so parse(write(g)) is integer-exact including the quantization tables.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import dct
from .codec import CoefficientGrid
from .errors import (
    BadMarker,
    HuffmanDecodeError,
    NotBaseline,
    PassthroughNotRepresentable,
    TruncatedStream,
    UnsupportedSampling,
)
from .quant import QuantTable, detect_qf, zigzag_flatten, zigzag_unflatten

SOI, EOI, SOS, DQT, DHT, DRI, COM = 0xD8, 0xD9, 0xDA, 0xDB, 0xC4, 0xDD, 0xFE
SOF0 = 0xC0
APP0 = 0xE0

_MARKER_NAMES = {
    0xC0: "SOF0", 0xC1: "SOF1", 0xC2: "SOF2", 0xC3: "SOF3",
    0xC5: "SOF5", 0xC6: "SOF6", 0xC7: "SOF7", 0xC9: "SOF9",
    0xCA: "SOF10", 0xCB: "SOF11", 0xCD: "SOF13", 0xCE: "SOF14",
    0xCF: "SOF15", 0xC4: "DHT", 0xC8: "JPG", 0xCC: "DAC",
    0xD8: "SOI", 0xD9: "EOI", 0xDA: "SOS", 0xDB: "DQT",
    0xDC: "DNL", 0xDD: "DRI", 0xDE: "DHP", 0xDF: "EXP", 0xFE: "COM",
}
_MARKER_NAMES.update({0xD0 + i: f"RST{i}" for i in range(8)})
_MARKER_NAMES.update({0xE0 + i: f"APP{i}" for i in range(16)})

# T.81 Annex K "typical" Huffman table specifications: 16 code-length
# counts followed by the symbol values in code order.
DC_LUMA_BITS = (0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0)
DC_LUMA_VALS = tuple(range(12))
DC_CHROMA_BITS = (0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0)
DC_CHROMA_VALS = tuple(range(12))
AC_LUMA_BITS = (0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7D)
AC_LUMA_VALS = (
    0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06,
    0x13, 0x51, 0x61, 0x07, 0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xA1, 0x08,
    0x23, 0x42, 0xB1, 0xC1, 0x15, 0x52, 0xD1, 0xF0, 0x24, 0x33, 0x62, 0x72,
    0x82, 0x09, 0x0A, 0x16, 0x17, 0x18, 0x19, 0x1A, 0x25, 0x26, 0x27, 0x28,
    0x29, 0x2A, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3A, 0x43, 0x44, 0x45,
    0x46, 0x47, 0x48, 0x49, 0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59,
    0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6A, 0x73, 0x74, 0x75,
    0x76, 0x77, 0x78, 0x79, 0x7A, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89,
    0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9A, 0xA2, 0xA3,
    0xA4, 0xA5, 0xA6, 0xA7, 0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4, 0xB5, 0xB6,
    0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4, 0xC5, 0xC6, 0xC7, 0xC8, 0xC9,
    0xCA, 0xD2, 0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA, 0xE1, 0xE2,
    0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9, 0xEA, 0xF1, 0xF2, 0xF3, 0xF4,
    0xF5, 0xF6, 0xF7, 0xF8, 0xF9, 0xFA,
)
AC_CHROMA_BITS = (0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 0x77)
AC_CHROMA_VALS = (
    0x00, 0x01, 0x02, 0x03, 0x11, 0x04, 0x05, 0x21, 0x31, 0x06, 0x12, 0x41,
    0x51, 0x07, 0x61, 0x71, 0x13, 0x22, 0x32, 0x81, 0x08, 0x14, 0x42, 0x91,
    0xA1, 0xB1, 0xC1, 0x09, 0x23, 0x33, 0x52, 0xF0, 0x15, 0x62, 0x72, 0xD1,
    0x0A, 0x16, 0x24, 0x34, 0xE1, 0x25, 0xF1, 0x17, 0x18, 0x19, 0x1A, 0x26,
    0x27, 0x28, 0x29, 0x2A, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3A, 0x43, 0x44,
    0x45, 0x46, 0x47, 0x48, 0x49, 0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58,
    0x59, 0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6A, 0x73, 0x74,
    0x75, 0x76, 0x77, 0x78, 0x79, 0x7A, 0x82, 0x83, 0x84, 0x85, 0x86, 0x87,
    0x88, 0x89, 0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9A,
    0xA2, 0xA3, 0xA4, 0xA5, 0xA6, 0xA7, 0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4,
    0xB5, 0xB6, 0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4, 0xC5, 0xC6, 0xC7,
    0xC8, 0xC9, 0xCA, 0xD2, 0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA,
    0xE2, 0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9, 0xEA, 0xF2, 0xF3, 0xF4,
    0xF5, 0xF6, 0xF7, 0xF8, 0xF9, 0xFA,
)


@dataclass(frozen=True)
class HuffmanTable:
    """One DC or AC table: 16 code-length counts plus symbols in code order."""

    table_class: str  # "dc" | "ac"
    table_id: int
    counts: tuple
    symbols: tuple

    def __post_init__(self):
        if self.table_class not in ("dc", "ac"):
            raise ValueError("table_class must be 'dc' or 'ac'")
        if len(self.counts) != 16:
            raise ValueError("counts must have 16 entries")
        if sum(self.counts) != len(self.symbols) or len(self.symbols) > 256:
            raise ValueError("symbol count disagrees with code-length counts")
        self.codes()  # validates canonical assignment fits

    def codes(self) -> dict:
        """symbol -> (code, length), canonical assignment."""
        out = {}
        code = 0
        k = 0
        for length in range(1, 17):
            for _ in range(self.counts[length - 1]):
                if code >= (1 << length):
                    raise ValueError("code-length counts overflow the code space")
                out[self.symbols[k]] = (code, length)
                code += 1
                k += 1
            code <<= 1
        return out

    def decode_map(self) -> dict:
        """(length, code) -> symbol, for bitwise decoding."""
        return {(ln, code): sym for sym, (code, ln) in self.codes().items()}


DC_LUMA = HuffmanTable("dc", 0, DC_LUMA_BITS, DC_LUMA_VALS)
AC_LUMA = HuffmanTable("ac", 0, AC_LUMA_BITS, AC_LUMA_VALS)
DC_CHROMA = HuffmanTable("dc", 1, DC_CHROMA_BITS, DC_CHROMA_VALS)
AC_CHROMA = HuffmanTable("ac", 1, AC_CHROMA_BITS, AC_CHROMA_VALS)


@dataclass
class JfifStructure:
    """What the container looked like, independent of the coefficients."""

    markers: list
    width: int
    height: int
    n_components: int
    sampling: tuple
    scan_span: tuple
    huffman_tables: list
    restart_interval: int = 0


# --- bit plumbing ----------------------------------------------------------


class _BitWriter:
    """MSB-first bit accumulator with 0xFF byte stuffing."""

    def __init__(self):
        self.out = bytearray()
        self.acc = 0
        self.nbits = 0

    def write(self, value: int, nbits: int):
        if nbits == 0:
            return
        self.acc = (self.acc << nbits) | (value & ((1 << nbits) - 1))
        self.nbits += nbits
        while self.nbits >= 8:
            byte = (self.acc >> (self.nbits - 8)) & 0xFF
            self.nbits -= 8
            self.acc &= (1 << self.nbits) - 1
            self.out.append(byte)
            if byte == 0xFF:
                self.out.append(0x00)

    def finish(self) -> bytes:
        if self.nbits:
            pad = 8 - self.nbits
            self.write((1 << pad) - 1, pad)  # pad with 1-bits
        return bytes(self.out)


class _BitReader:
    """Reads MSB-first bits from already unstuffed entropy bytes."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0
        self.bit = 0

    def read_bit(self) -> int:
        if self.pos >= len(self.data):
            raise TruncatedStream("entropy-coded data exhausted")
        b = (self.data[self.pos] >> (7 - self.bit)) & 1
        self.bit += 1
        if self.bit == 8:
            self.bit = 0
            self.pos += 1
        return b

    def read_bits(self, n: int) -> int:
        v = 0
        for _ in range(n):
            v = (v << 1) | self.read_bit()
        return v


def _extend(value: int, size: int) -> int:
    if size == 0:
        return 0
    if value < (1 << (size - 1)):
        return value - (1 << size) + 1
    return value


def _category(value: int) -> int:
    return int(abs(int(value))).bit_length()


# --- encoder ---------------------------------------------------------------


def _segment(out: bytearray, marker: int, payload: bytes):
    out += bytes([0xFF, marker])
    out += struct.pack(">H", 2 + len(payload)) + payload


def _encode_block(writer: _BitWriter, block: np.ndarray, pred: int, dc_codes: dict, ac_codes: dict) -> int:
    zz = zigzag_flatten(block)
    dc = int(zz[0])
    diff = dc - pred
    s = _category(diff)
    code, ln = dc_codes[s]
    writer.write(code, ln)
    if s:
        amp = diff if diff >= 0 else diff + (1 << s) - 1
        writer.write(amp, s)

    run = 0
    for k in range(1, 64):
        v = int(zz[k])
        if v == 0:
            run += 1
            continue
        while run > 15:
            code, ln = ac_codes[0xF0]  # ZRL: sixteen zeros
            writer.write(code, ln)
            run -= 16
        s = _category(v)
        code, ln = ac_codes[(run << 4) | s]
        writer.write(code, ln)
        amp = v if v >= 0 else v + (1 << s) - 1
        writer.write(amp, s)
        run = 0
    if run:
        code, ln = ac_codes[0x00]  # EOB
        writer.write(code, ln)
    return dc


def write_jfif(grid: CoefficientGrid) -> bytes:
    """Serialize a 3-channel YCbCr grid as a baseline JFIF byte string."""
    if grid.colorspace != "ycbcr" or grid.n_channels != 3:
        raise PassthroughNotRepresentable(
            "only 3-channel ycbcr grids map onto a standard stream"
        )
    for ch in grid.channels:
        # baseline codes reach DC differences of +-2047 and AC of +-1023;
        # DC in [-1024, 1023] keeps every difference representable
        dc = ch[:, :, 0, 0]
        ac = ch.reshape(-1, 64)[:, 1:]
        if dc.max() > 1023 or dc.min() < -1024 or ac.max() > 1023 or ac.min() < -1023:
            raise ValueError("coefficient outside the baseline code range")
    out = bytearray(b"\xff" + bytes([SOI]))
    _segment(out, APP0, b"JFIF\x00" + bytes((1, 1, 0)) + struct.pack(">HHBB", 1, 1, 0, 0))
    _segment(
        out,
        DQT,
        bytes([0x00]) + bytes(int(v) for v in zigzag_flatten(grid.table.luma))
        + bytes([0x01]) + bytes(int(v) for v in zigzag_flatten(grid.table.chroma)),
    )
    sof = struct.pack(">BHHB", 8, grid.height, grid.width, 3)
    for cid, tq in ((1, 0), (2, 1), (3, 1)):
        sof += bytes((cid, 0x11, tq))
    _segment(out, SOF0, sof)
    dht = b""
    for t in (DC_LUMA, AC_LUMA, DC_CHROMA, AC_CHROMA):
        cls = 0 if t.table_class == "dc" else 1
        dht += bytes([(cls << 4) | t.table_id]) + bytes(t.counts) + bytes(t.symbols)
    _segment(out, DHT, dht)
    _segment(out, SOS, bytes([3, 1, 0x00, 2, 0x11, 3, 0x11, 0, 63, 0]))

    writer = _BitWriter()
    codes = [
        (DC_LUMA.codes(), AC_LUMA.codes()),
        (DC_CHROMA.codes(), AC_CHROMA.codes()),
        (DC_CHROMA.codes(), AC_CHROMA.codes()),
    ]
    preds = [0, 0, 0]
    nby, nbx = grid.channels[0].shape[:2]
    for by in range(nby):
        for bx in range(nbx):
            for c in range(3):
                preds[c] = _encode_block(
                    writer, grid.channels[c][by, bx], preds[c], *codes[c]
                )
    out += writer.finish()
    out += b"\xff" + bytes([EOI])
    return bytes(out)


# --- parser ----------------------------------------------------------------


def _read_u16(data: bytes, pos: int) -> int:
    if pos + 2 > len(data):
        raise TruncatedStream("segment length runs past the end")
    return (data[pos] << 8) | data[pos + 1]


def _split_scan(data: bytes, pos: int):
    """Unstuff entropy data, splitting on restart markers.

    Returns (segments, end_pos) with end_pos at the 0xFF of the first
    non-restart marker after the scan.
    """
    segments = []
    cur = bytearray()
    n = len(data)
    while True:
        if pos >= n:
            raise TruncatedStream("scan data ended without a terminating marker")
        b = data[pos]
        if b != 0xFF:
            cur.append(b)
            pos += 1
            continue
        if pos + 1 >= n:
            raise TruncatedStream("dangling 0xFF at end of scan")
        m = data[pos + 1]
        if m == 0x00:
            cur.append(0xFF)
            pos += 2
        elif 0xD0 <= m <= 0xD7:
            segments.append(bytes(cur))
            cur = bytearray()
            pos += 2
        else:
            segments.append(bytes(cur))
            return segments, pos


def _decode_block(reader: _BitReader, dc_map: dict, ac_map: dict, pred: int):
    def read_symbol(table_map):
        code = 0
        for length in range(1, 17):
            code = (code << 1) | reader.read_bit()
            sym = table_map.get((length, code))
            if sym is not None:
                return sym
        raise HuffmanDecodeError("no code matched within 16 bits")

    zz = np.zeros(64, dtype=np.int32)
    s = read_symbol(dc_map)
    if s > 11:  # 8-bit baseline: DC categories 0..11
        raise HuffmanDecodeError(f"DC category {s} out of range")
    diff = _extend(reader.read_bits(s), s)
    pred += diff
    if not -2048 <= pred <= 2047:  # 8-bit baseline coefficient range
        raise HuffmanDecodeError(f"DC value {pred} out of range")
    zz[0] = pred
    k = 1
    while k < 64:
        rs = read_symbol(ac_map)
        r, s = rs >> 4, rs & 0x0F
        if s == 0:
            if rs == 0x00:  # EOB
                break
            if rs == 0xF0:  # ZRL
                k += 16
                continue
            raise HuffmanDecodeError(f"invalid AC symbol 0x{rs:02x}")
        if s > 10:  # 8-bit baseline: AC sizes 1..10
            raise HuffmanDecodeError(f"AC size {s} out of range")
        k += r
        if k > 63:
            raise HuffmanDecodeError("AC run overflows the block")
        zz[k] = _extend(reader.read_bits(s), s)
        k += 1
    return zigzag_unflatten(zz), pred


def parse_jfif(data: bytes):
    """Decode a baseline stream to (CoefficientGrid, JfifStructure)."""
    if len(data) < 2 or data[0] != 0xFF or data[1] != SOI:
        raise BadMarker("stream does not start with SOI")
    pos = 2
    markers = ["SOI"]
    qtables: dict[int, np.ndarray] = {}
    htables: dict[tuple, HuffmanTable] = {}
    frame = None
    restart_interval = 0
    scan = None
    scan_span = (0, 0)
    saw_eoi = False

    while pos < len(data):
        if data[pos] != 0xFF:
            raise BadMarker(f"expected a marker at offset {pos}")
        while pos < len(data) and data[pos] == 0xFF:
            pos += 1  # fill bytes are legal before a marker code
        if pos >= len(data):
            raise TruncatedStream("stream ends inside a marker")
        marker = data[pos]
        pos += 1
        name = _MARKER_NAMES.get(marker, f"0x{marker:02x}")
        markers.append(name)

        if marker == EOI:
            saw_eoi = True
            break
        if marker in (0xC1, 0xC2, 0xC3, 0xC5, 0xC6, 0xC7, 0xC9, 0xCA, 0xCB, 0xCD, 0xCE, 0xCF, 0xCC):
            raise NotBaseline(f"{name} frames are not supported")
        if 0xD0 <= marker <= 0xD7:
            raise BadMarker("restart marker outside entropy-coded data")

        length = _read_u16(data, pos)
        if length < 2:
            raise BadMarker(f"{name} segment length {length} is impossible")
        if pos + length > len(data):
            raise TruncatedStream(f"{name} segment runs past the end")
        body = data[pos + 2 : pos + length]
        pos += length

        if APP0 <= marker <= 0xEF or marker == COM:
            continue
        elif marker == DQT:
            i = 0
            while i < len(body):
                pq, tq = body[i] >> 4, body[i] & 0x0F
                if pq != 0:
                    raise NotBaseline("16-bit quantization tables are not baseline")
                if i + 65 > len(body):
                    raise TruncatedStream("DQT table truncated")
                vec = np.frombuffer(body, np.uint8, 64, i + 1).astype(np.int64)
                qtables[tq] = zigzag_unflatten(vec)
                i += 65
        elif marker == DHT:
            i = 0
            while i < len(body):
                if i + 17 > len(body):
                    raise TruncatedStream("DHT header truncated")
                cls, tid = body[i] >> 4, body[i] & 0x0F
                counts = tuple(body[i + 1 : i + 17])
                nsym = sum(counts)
                if i + 17 + nsym > len(body):
                    raise TruncatedStream("DHT symbols truncated")
                symbols = tuple(body[i + 17 : i + 17 + nsym])
                try:
                    table = HuffmanTable("dc" if cls == 0 else "ac", tid, counts, symbols)
                except ValueError as exc:
                    raise HuffmanDecodeError(str(exc)) from exc
                htables[(cls, tid)] = table
                i += 17 + nsym
        elif marker == DRI:
            restart_interval = struct.unpack(">H", body[:2])[0]
        elif marker == SOF0:
            if frame is not None:
                raise BadMarker("multiple SOF0 segments")
            if len(body) < 6:
                raise TruncatedStream("SOF0 header truncated")
            precision, height, width, ncomp = struct.unpack(">BHHB", body[:6])
            if len(body) < 6 + 3 * ncomp:
                raise TruncatedStream("SOF0 component list truncated")
            if width < 1 or height < 1:
                raise BadMarker("frame dimensions must be positive")
            if precision != 8:
                raise NotBaseline(f"{precision}-bit samples are not baseline")
            if ncomp != 3:
                raise BadMarker(f"expected 3 components, got {ncomp}")
            comps = []
            for c in range(ncomp):
                cid, hv, tq = body[6 + 3 * c : 9 + 3 * c]
                if hv != 0x11:
                    raise UnsupportedSampling(f"component {cid} uses {hv >> 4}x{hv & 15} sampling")
                comps.append((cid, tq))
            frame = (width, height, comps)
        elif marker == SOS:
            if frame is None:
                raise BadMarker("SOS before SOF0")
            if scan is not None:
                raise BadMarker("multiple scans are not baseline-interleaved")
            if len(body) < 1:
                raise TruncatedStream("SOS header truncated")
            ns = body[0]
            if len(body) < 1 + 2 * ns + 3:
                raise TruncatedStream("SOS header truncated")
            if ns != len(frame[2]):
                raise BadMarker("scan does not cover all components")
            comp_tables = []
            for c in range(ns):
                cs, tt = body[1 + 2 * c], body[2 + 2 * c]
                td, ta = tt >> 4, tt & 0x0F
                if (0, td) not in htables or (1, ta) not in htables:
                    raise BadMarker(f"scan references undefined Huffman table {td}/{ta}")
                comp_tables.append((htables[(0, td)], htables[(1, ta)]))
            ss, se, a = body[1 + 2 * ns : 4 + 2 * ns]
            if ss != 0 or se != 63 or a != 0:
                raise NotBaseline("spectral selection / successive approximation present")
            scan_start = pos
            segments, pos = _split_scan(data, pos)
            scan_span = (scan_start, pos)
            scan = (comp_tables, segments)
        else:
            raise BadMarker(f"unexpected marker {name}")

    if scan is None:
        raise BadMarker("stream has no scan")
    if not saw_eoi:
        raise TruncatedStream("missing EOI")

    width, height, comps = frame
    nby = -(-height // dct.BLOCK)
    nbx = -(-width // dct.BLOCK)
    n_mcu = nby * nbx

    comp_tables, segments = scan
    maps = [(d.decode_map(), a.decode_map()) for d, a in comp_tables]
    blocks = [np.zeros((n_mcu, 8, 8), dtype=np.int32) for _ in comps]
    preds = [0] * len(comps)
    mcu = 0
    for seg_idx, seg in enumerate(segments):
        reader = _BitReader(seg)
        preds = [0] * len(comps)  # DC prediction resets at restart boundaries
        count = restart_interval if restart_interval else n_mcu - mcu
        count = min(count, n_mcu - mcu)
        if count == 0 and seg_idx < len(segments):
            break
        for _ in range(count):
            for c in range(len(comps)):
                blocks[c][mcu], preds[c] = _decode_block(reader, *maps[c], preds[c])
            mcu += 1
    if mcu != n_mcu:
        raise TruncatedStream(f"decoded {mcu} of {n_mcu} MCUs")

    tq_y = comps[0][1]
    tq_c = comps[1][1] if len(comps) > 1 else tq_y
    if len(comps) == 3 and comps[2][1] != tq_c:
        raise BadMarker("chroma components use different quantization tables")
    if tq_y not in qtables or tq_c not in qtables:
        raise BadMarker("scan references undefined quantization table")
    luma, chroma = qtables[tq_y], qtables[tq_c]
    try:
        table = QuantTable(luma, chroma, detect_qf(luma, chroma))
    except ValueError as exc:
        raise BadMarker(f"invalid quantization table: {exc}") from exc

    grid = CoefficientGrid(
        tuple(b.reshape(nby, nbx, 8, 8) for b in blocks),
        table,
        width,
        height,
        "ycbcr",
    )
    structure = JfifStructure(
        markers=markers,
        width=width,
        height=height,
        n_components=len(comps),
        sampling=tuple((1, 1) for _ in comps),
        scan_span=scan_span,
        huffman_tables=[t for pair in comp_tables for t in pair],
        restart_interval=restart_interval,
    )
    return grid, structure
