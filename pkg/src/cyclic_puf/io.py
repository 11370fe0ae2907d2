"""Small file helpers: atomic writes and transparent gzip by extension."""
import gzip
import json
import os
import tempfile
from pathlib import Path


def atomic_write_bytes(path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_text(path, text: str) -> None:
    data = text.encode("utf-8")
    if str(path).endswith(".gz"):
        # fixed mtime keeps compressed output byte-identical across runs
        data = gzip.compress(data, mtime=0)
    atomic_write_bytes(path, data)


def read_text(path) -> str:
    raw = Path(path).read_bytes()
    if str(path).endswith(".gz"):
        raw = gzip.decompress(raw)
    return raw.decode("utf-8")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_json(path, obj) -> None:
    write_text(path, dumps(obj))


def read_json(path):
    return json.loads(read_text(path))
