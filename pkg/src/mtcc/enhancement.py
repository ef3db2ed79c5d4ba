"""Segmentation, contextual Gabor filtering and SMQT normalization.

The full pipeline runs segment -> stft_analyze -> gabor_enhance ->
smqt_normalize and returns the final image together with the texture maps
from the analysis pass.
"""

import numpy as np
from scipy import ndimage, signal

from .config import EnhancementParams, StftParams
from .stft import EmptyMaskError, stft_analyze

__all__ = [
    "EmptyMaskError",
    "segment",
    "gabor_enhance",
    "smqt_normalize",
    "enhance_pipeline",
]


def _close_open(mask: np.ndarray) -> np.ndarray:
    """3x3 closing then opening with edge padding so the image border does
    not erode (scipy treats outside pixels as background otherwise)."""
    se = np.ones((3, 3), dtype=bool)
    padded = np.pad(mask, 2, mode="edge")
    padded = ndimage.binary_closing(padded, structure=se)
    padded = ndimage.binary_opening(padded, structure=se)
    return padded[2:-2, 2:-2]


def segment(img: np.ndarray, params: EnhancementParams = None) -> np.ndarray:
    """Blockwise-variance foreground mask.

    Blocks whose variance reaches variance_threshold_ratio times the global
    mean block variance are foreground; partial border blocks are
    background.  The block mask is smoothed by closing/opening, holes are
    filled and only the largest connected component survives.
    """
    params = params if params is not None else EnhancementParams()
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError(f"expected a 2-D grayscale image, got shape {img.shape}")
    h, w = img.shape
    bs = params.block_size
    nby, nbx = h // bs, w // bs
    if nby == 0 or nbx == 0:
        raise EmptyMaskError(f"image {w}x{h} smaller than one {bs}px block")

    blocks = img[: nby * bs, : nbx * bs].astype(np.float64)
    blocks = blocks.reshape(nby, bs, nbx, bs)
    var = blocks.var(axis=(1, 3))
    mean_var = float(var.mean())
    if mean_var <= 0.0:
        raise EmptyMaskError("image has no intensity variance to segment")

    bmask = var >= params.variance_threshold_ratio * mean_var
    mask = np.zeros((h, w), dtype=bool)
    mask[: nby * bs, : nbx * bs] = np.repeat(np.repeat(bmask, bs, axis=0), bs, axis=1)

    mask = _close_open(mask)
    mask = ndimage.binary_fill_holes(mask)
    labels, n = ndimage.label(mask, structure=np.ones((3, 3), dtype=int))
    if n == 0:
        raise EmptyMaskError("segmentation produced an empty mask")
    if n > 1:
        sizes = ndimage.sum_labels(np.ones_like(labels), labels, index=np.arange(1, n + 1))
        mask = labels == (1 + int(np.argmax(sizes)))
    return mask


def _gabor_kernel(theta: float, freq: float, params: EnhancementParams) -> np.ndarray:
    """Even-symmetric, zero-mean, unit-norm Gabor kernel; theta is the wave
    vector angle (normal to the ridges), measured y-up like the orientation
    map, so the pixel-space direction is (cos theta, -sin theta)."""
    r = params.gabor_kernel_radius
    sigma = params.gabor_sigma
    yy, xx = np.mgrid[-r : r + 1, -r : r + 1].astype(np.float64)
    xr = xx * np.cos(theta) - yy * np.sin(theta)
    yr = xx * np.sin(theta) + yy * np.cos(theta)
    kern = np.exp(-(xr * xr + yr * yr) / (2.0 * sigma * sigma)) * np.cos(2.0 * np.pi * freq * xr)
    kern -= kern.mean()
    norm = np.sqrt((kern * kern).sum())
    return kern / norm if norm > 0 else kern


def gabor_enhance(img: np.ndarray, maps, params: EnhancementParams = None) -> np.ndarray:
    """Per-pixel oriented Gabor filtering steered by the texture maps.

    Orientation and frequency are quantized into a small kernel bank; each
    pixel takes the response of its nearest bank kernel.
    """
    params = params if params is not None else EnhancementParams()
    img = np.asarray(img)
    if img.shape != maps.orientation.shape:
        raise ValueError(f"image {img.shape} does not match maps {maps.orientation.shape}")

    theta = np.mod(maps.ridge_orientation(), np.pi)  # pi-periodic
    freq = maps.ridge_frequency()
    n_or, n_fr = params.gabor_orient_bins, params.gabor_freq_bins

    oi = np.minimum((theta / np.pi * n_or).astype(int), n_or - 1)
    span = maps.freq_hi - maps.freq_lo
    fi = np.minimum(((freq - maps.freq_lo) / span * n_fr).astype(int), n_fr - 1)
    fi = np.maximum(fi, 0)

    imgf = img.astype(np.float64)
    out = np.zeros_like(imgf)
    for key in np.unique(oi.astype(np.int64) * n_fr + fi):
        bi, bj = divmod(int(key), n_fr)
        sel = (oi == bi) & (fi == bj)
        theta_c = (bi + 0.5) * np.pi / n_or
        freq_c = maps.freq_lo + (bj + 0.5) * span / n_fr
        kern = _gabor_kernel(theta_c, freq_c, params)
        resp = signal.fftconvolve(imgf, kern, mode="same")
        out[sel] = resp[sel]

    lo, hi = float(out.min()), float(out.max())
    if hi - lo < 1e-12:
        return np.zeros(img.shape, dtype=np.uint8)
    return np.rint((out - lo) * (255.0 / (hi - lo))).astype(np.uint8)


def _smqt_lut(counts: np.ndarray, levels: int) -> np.ndarray:
    """Leaf codes of the mean-split binary tree over the value axis."""
    codes = np.zeros(256, dtype=np.int64)
    values = np.arange(256, dtype=np.float64)

    def rec(lo: int, hi: int, depth: int, code: int):
        # value interval [lo, hi) of the histogram
        if depth == levels or lo >= hi:
            codes[lo:hi] = code << (levels - depth)
            return
        seg = counts[lo:hi]
        total = seg.sum()
        if total == 0:
            codes[lo:hi] = code << (levels - depth)
            return
        mean = float((seg * values[lo:hi]).sum() / total)
        split = lo
        while split < hi and values[split] <= mean:
            split += 1
        rec(lo, split, depth + 1, code << 1)
        rec(split, hi, depth + 1, (code << 1) | 1)

    rec(0, 256, 0, 0)
    return codes


def smqt_normalize(img: np.ndarray, levels: int = 8, mask: np.ndarray = None) -> np.ndarray:
    """Successive mean quantization transform of an 8-bit image.

    The pixel population is split recursively at its mean into a binary
    tree of the given depth; the output is the leaf code rescaled to 8
    bits.  Order preserving: a brighter input pixel never maps below a
    darker one.  When a mask is given the split statistics come from the
    masked pixels only, but the transform applies to the whole frame.
    """
    img = np.asarray(img)
    if img.dtype != np.uint8:
        raise ValueError(f"smqt expects a uint8 image, got {img.dtype}")
    if not 1 <= levels <= 16:
        raise ValueError(f"levels must be in [1, 16], got {levels}")
    pixels = img[mask] if mask is not None else img
    counts = np.bincount(pixels.ravel(), minlength=256)
    codes = _smqt_lut(counts, levels)
    lut = np.rint(codes * (255.0 / (2**levels - 1))).astype(np.uint8)
    return lut[img]


def enhance_pipeline(
    img: np.ndarray,
    params: EnhancementParams = None,
    stft_params: StftParams = None,
):
    """segment -> stft_analyze -> gabor_enhance -> smqt_normalize.

    Returns (final uint8 image, TextureMaps).  Raises EmptyMaskError when
    segmentation finds no foreground.
    """
    params = params if params is not None else EnhancementParams()
    mask = segment(img, params)
    stft_img, maps = stft_analyze(img, mask, stft_params)
    gab = gabor_enhance(stft_img, maps, params)
    out = smqt_normalize(gab, params.smqt_levels, mask if params.smqt_masked_only else None)
    return out, maps
