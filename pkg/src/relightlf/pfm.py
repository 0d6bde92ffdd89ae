"""Float image I/O: PFM read/write and a Radiance RGBE (.hdr) reader.

PFM files store float32 scanlines bottom-up; the scale header's sign encodes
endianness (negative = little-endian, the only byte order we write). RGBE
components decode as (byte + 0.5) * 2^(exponent - 136), zero exponent means
black.
"""

import numpy as np


def write_pfm(path, image):
    """Write (H, W, 3) as color 'PF' or (H, W) as grayscale 'Pf'.

    Data is converted to float32 and written little-endian, rows bottom-up.
    """
    image = np.asarray(image, dtype=np.float32)
    if image.ndim == 3 and image.shape[2] == 3:
        magic = b"PF"
    elif image.ndim == 2:
        magic = b"Pf"
    else:
        raise ValueError(f"expected (H, W, 3) or (H, W), got {image.shape}")
    h, w = image.shape[:2]
    with open(path, "wb") as fh:
        fh.write(magic + b"\n")
        fh.write(f"{w} {h}\n".encode("ascii"))
        fh.write(b"-1.0\n")
        fh.write(np.ascontiguousarray(np.flipud(image), dtype="<f4").tobytes())


def read_pfm(path):
    """Read a PFM file to float32, (H, W, 3) for 'PF' or (H, W) for 'Pf'."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens = []
    pos = 0
    while len(tokens) < 4 and pos < len(data):
        # header tokens are whitespace separated; some writers use one line
        end = pos
        while end < len(data) and data[end] not in b" \t\r\n":
            end += 1
        if end > pos:
            tokens.append(data[pos:end])
        pos = end + 1
    if len(tokens) < 4:
        raise ValueError(f"{path}: truncated header")
    magic = tokens[0]
    if magic == b"PF":
        channels = 3
    elif magic == b"Pf":
        channels = 1
    else:
        raise ValueError(f"{path}: bad magic {magic!r}")
    w, h = int(tokens[1]), int(tokens[2])
    scale = float(tokens[3])
    if scale == 0.0:
        raise ValueError(f"{path}: zero scale")
    dtype = "<f4" if scale < 0.0 else ">f4"
    count = w * h * channels
    flat = np.frombuffer(data, dtype=dtype, count=count, offset=pos)
    if flat.size != count:
        raise ValueError(f"{path}: truncated pixel data")
    image = flat.reshape(h, w, channels)
    image = np.flipud(image).astype(np.float32)
    if abs(scale) != 1.0:
        image = image * np.float32(abs(scale))
    return image[:, :, 0] if channels == 1 else image


def _decode_rgbe(rgbe):
    """(..., 4) uint8 -> (..., 3) float32 radiance."""
    e = rgbe[..., 3].astype(np.int32)
    scale = np.ldexp(np.float32(1.0), e - 136).astype(np.float32)
    rgb = (rgbe[..., :3].astype(np.float32) + 0.5) * scale[..., None]
    rgb[e == 0] = 0.0
    return rgb


def _read_flat_scanline(data, pos, out):
    """Uncompressed RGBE pixels, honoring old-style repeat markers."""
    w = out.shape[0]
    x = 0
    shift = 0
    while x < w:
        px = data[pos:pos + 4]
        if len(px) < 4:
            raise ValueError("truncated scanline")
        pos += 4
        if px[0] == 1 and px[1] == 1 and px[2] == 1:
            if x == 0:
                raise ValueError("repeat marker before any pixel")
            count = px[3] << shift
            if x + count > w:
                raise ValueError("repeat run past end of scanline")
            out[x:x + count] = out[x - 1]
            x += count
            shift += 8
        else:
            out[x] = np.frombuffer(px, dtype=np.uint8)
            x += 1
            shift = 0
    return pos


def _read_rle_scanline(data, pos, out):
    """New-style RLE: four per-component planes of runs and literals."""
    w = out.shape[0]
    for c in range(4):
        x = 0
        while x < w:
            code = data[pos]
            pos += 1
            if code > 128:
                run = code - 128
                if x + run > w:
                    raise ValueError("RLE run past end of scanline")
                out[x:x + run, c] = data[pos]
                pos += 1
                x += run
            else:
                if code == 0 or x + code > w:
                    raise ValueError("bad RLE literal length")
                out[x:x + code, c] = np.frombuffer(
                    data[pos:pos + code], dtype=np.uint8)
                pos += code
                x += code
    return pos


def read_hdr(path):
    """Read a Radiance RGBE file to linear float32 (H, W, 3)."""
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"#?"):
        raise ValueError(f"{path}: missing radiance signature")
    pos = data.index(b"\n") + 1
    while True:
        nl = data.index(b"\n", pos)
        line = data[pos:nl].strip()
        pos = nl + 1
        if line == b"":
            break
        if line.startswith(b"FORMAT=") and b"rgbe" not in line:
            raise ValueError(f"{path}: unsupported format {line!r}")
    nl = data.index(b"\n", pos)
    res = data[pos:nl].split()
    pos = nl + 1
    if len(res) != 4 or res[0] != b"-Y" or res[2] != b"+X":
        raise ValueError(f"{path}: unsupported orientation {b' '.join(res)!r}")
    h, w = int(res[1]), int(res[3])
    rgbe = np.zeros((h, w, 4), dtype=np.uint8)
    for row in range(h):
        head = data[pos:pos + 4]
        if (len(head) == 4 and head[0] == 2 and head[1] == 2
                and (head[2] << 8 | head[3]) == w and 8 <= w <= 0x7FFF):
            pos = _read_rle_scanline(data, pos + 4, rgbe[row])
        else:
            pos = _read_flat_scanline(data, pos, rgbe[row])
    return _decode_rgbe(rgbe)
