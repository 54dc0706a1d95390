"""Image helpers shared across test modules, independent of the package."""

import io

import numpy as np
from PIL import Image


def png_bytes(arr) -> bytes:
    """Encode an (h, w, 3) uint8 array as PNG."""
    buf = io.BytesIO()
    Image.fromarray(np.asarray(arr, dtype=np.uint8), mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def white_image(w: int, h: int) -> np.ndarray:
    return np.full((h, w, 3), 255, dtype=np.uint8)
