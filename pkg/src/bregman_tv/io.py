"""Plain-text and PGM file formats for images, sinograms and traces."""

import csv

import numpy as np

from ._validation import InvalidInputError, check_image, check_positive_int, check_vector


def write_pgm(path, image, binary=True, maxval=65535):
    """Write an image with values in ``[0, 1]`` as PGM (P5 or P2).

    Values outside ``[0, 1]`` are clipped.  ``maxval > 255`` gives 16-bit
    big-endian samples in the binary form.
    """
    image = check_image(image, "image")
    check_positive_int(maxval, "maxval")
    if maxval > 65535:
        raise InvalidInputError("maxval must be at most 65535")
    q = np.rint(np.clip(image, 0.0, 1.0) * maxval).astype(np.int64)
    h, w = q.shape
    header = f"{'P5' if binary else 'P2'}\n{w} {h}\n{maxval}\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        if binary:
            dtype = ">u2" if maxval > 255 else "u1"
            fh.write(q.astype(dtype).tobytes())
        else:
            for row in q:
                fh.write((" ".join(str(x) for x in row) + "\n").encode("ascii"))


def _header_tokens(data, count):
    tokens, pos = [], 0
    while len(tokens) < count:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise InvalidInputError("truncated PGM header")
        tokens.append(data[start:pos].decode("ascii"))
    return tokens, pos


def read_pgm(path):
    """Read a P2 or P5 PGM file into a float image scaled to ``[0, 1]``."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens, pos = _header_tokens(data, 4)
    magic = tokens[0]
    try:
        w, h, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise InvalidInputError(f"bad PGM header in {path}") from exc
    if w < 1 or h < 1 or not 0 < maxval <= 65535:
        raise InvalidInputError(f"bad PGM dimensions in {path}")
    if magic == "P5":
        pos += 1  # single whitespace byte after maxval
        dtype = ">u2" if maxval > 255 else "u1"
        itemsize = np.dtype(dtype).itemsize
        raw = data[pos : pos + w * h * itemsize]
        if len(raw) != w * h * itemsize:
            raise InvalidInputError(f"truncated PGM raster in {path}")
        q = np.frombuffer(raw, dtype=dtype).astype(float)
    elif magic == "P2":
        vals = data[pos:].split()
        if len(vals) < w * h:
            raise InvalidInputError(f"truncated PGM raster in {path}")
        q = np.array([int(x) for x in vals[: w * h]], dtype=float)
    else:
        raise InvalidInputError(f"unsupported PGM magic {magic!r}")
    return q.reshape(h, w) / maxval


def write_image_csv(path, image):
    """Raw float image, one row per line, written with full precision."""
    image = check_image(image, "image")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in image:
            writer.writerow([repr(float(x)) for x in row])


def read_image_csv(path):
    with open(path, newline="") as fh:
        rows = [[float(x) for x in row] for row in csv.reader(fh) if row]
    if not rows or len({len(r) for r in rows}) != 1:
        raise InvalidInputError(f"ragged or empty image CSV {path}")
    return np.array(rows)


def write_sinogram_csv(path, data, n_angles, n_detectors):
    """Header ``n_angles,n_detectors``, the two sizes, then one row per angle."""
    n_angles = check_positive_int(n_angles, "n_angles")
    n_detectors = check_positive_int(n_detectors, "n_detectors")
    data = check_vector(data, n_angles * n_detectors, "sinogram").reshape(n_angles, n_detectors)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["n_angles", "n_detectors"])
        writer.writerow([n_angles, n_detectors])
        for row in data:
            writer.writerow([repr(float(x)) for x in row])


def read_sinogram_csv(path):
    """Returns ``(data, n_angles, n_detectors)`` with ``data`` flattened."""
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if len(rows) < 2 or [c.strip() for c in rows[0]] != ["n_angles", "n_detectors"]:
        raise InvalidInputError(f"{path}: missing n_angles,n_detectors header")
    try:
        n_angles, n_detectors = (int(x) for x in rows[1])
        data = np.array([[float(x) for x in row] for row in rows[2:]])
    except ValueError as exc:
        raise InvalidInputError(f"{path}: non-numeric sinogram entry") from exc
    if data.shape != (n_angles, n_detectors):
        raise InvalidInputError(
            f"{path}: expected {n_angles}x{n_detectors} values, got {data.shape}"
        )
    return data.ravel(), n_angles, n_detectors
