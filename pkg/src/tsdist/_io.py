"""File-writing helpers shared by the exporters."""
import hashlib
import os
import tempfile
from pathlib import Path


def round_sig(x, digits=12):
    """Round ``x`` to ``digits`` significant digits, returned as a float."""
    x = float(x)
    if x == 0.0:
        return 0.0
    return float(f"{x:.{digits}g}")


def atomic_write_bytes(path, data):
    """Write via a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text):
    atomic_write_bytes(path, text.encode("utf-8"))


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
