"""Short-time Fourier analysis: texture maps and spectral enhancement.

The image is scanned with overlapping square windows (origins every
``stride = window_size - overlap`` pixels).  Each window is mean-subtracted,
tapered with a raised cosine, zero-padded and transformed.  From the power
spectrum we take, per window,

  * the dominant orientation: half the argument of the spectral-energy
    weighted sum of exp(2i * beta) over in-band bins (double angles, so the
    pi ambiguity of opposing bins cancels instead of the bins themselves);
    spectral angles beta are measured y-up, the same convention minutia
    directions use,
  * the dominant radial frequency: power^2 weighted centroid of the radial
    frequency over in-band bins (squaring sharpens the peak against
    leakage skew),
  * the energy: log of the total spectral power, floored at log(1e-12).

Windows without in-band power inherit the nearest valid window's values.
Per-window values are replicated onto that window's stride cell, which makes
ownership disjoint and the result independent of scan order.

The enhanced image multiplies each window spectrum by |F|^root_exponent and
radial/angular Butterworth responses centered on the window's dominant
frequency and orientation, then inverse-transforms and overlap-adds with the
taper as synthesis window.
"""

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import ndimage

from .angles import wrap_pi
from .config import StftParams

_LOG_EPS = 1e-12


class EmptyMaskError(ValueError):
    """Raised when a segmentation mask has no foreground pixels."""


@dataclass
class TextureMaps:
    """Pixel-resolution texture maps; all three value maps are angles.

    orientation holds the doubled ridge-normal angle in [-pi, pi), measured
    in the same y-up sense as minutia directions; frequency and energy are
    normalized into [-pi, pi) from the fixed frequency band and the
    per-image masked energy range respectively.
    raw_frequency (cycles/pixel) and raw_energy (log power) keep the
    unnormalized values.
    """

    orientation: np.ndarray
    frequency: np.ndarray
    energy: np.ndarray
    mask: np.ndarray
    raw_frequency: np.ndarray
    raw_energy: np.ndarray
    freq_lo: float = 1.0 / 25.0
    freq_hi: float = 1.0 / 3.0

    def ridge_orientation(self) -> np.ndarray:
        """Single-angle orientation in [-pi/2, pi/2)."""
        return self.orientation / 2.0

    def ridge_frequency(self) -> np.ndarray:
        """Frequency in cycles/pixel decoded from the angle map."""
        return self.freq_lo + (self.frequency + np.pi) / (2.0 * np.pi) * (
            self.freq_hi - self.freq_lo
        )


def normalize_to_angle(values, lo: float, hi: float):
    """Linear map of [lo, hi] onto [-pi, pi]; values are clamped first."""
    if hi <= lo:
        raise ValueError(f"empty normalization range: lo={lo}, hi={hi}")
    v = np.clip(np.asarray(values, dtype=float), lo, hi)
    out = -np.pi + (v - lo) * (2.0 * np.pi / (hi - lo))
    return out if out.ndim else float(out)


@dataclass
class WindowAnalysis:
    """Per-window intermediate results of the analysis pass."""

    ys: np.ndarray  # window origins, rows
    xs: np.ndarray  # window origins, cols
    tapered: np.ndarray  # (ny, nx, win, win)
    spectra: np.ndarray  # (ny, nx, nfft, nfft) complex
    frequency: np.ndarray  # (ny, nx) cycles/pixel
    orientation2: np.ndarray  # (ny, nx) doubled angle in [-pi, pi)
    energy: np.ndarray  # (ny, nx) log total power
    valid: np.ndarray  # (ny, nx) had in-band power


def _taper(window_size: int) -> np.ndarray:
    w = np.hanning(window_size)
    return w[:, None] * w[None, :]


def _spectral_grids(params: StftParams):
    f = np.fft.fftfreq(params.fft_size)
    fy, fx = np.meshgrid(f, f, indexing="ij")
    rad = np.hypot(fx, fy)
    band = (rad > params.freq_lo) & (rad <= params.freq_hi)
    beta2 = np.exp(2j * np.arctan2(-fy, fx))
    return rad, band, beta2


def analyze_windows(img: np.ndarray, params: StftParams) -> WindowAnalysis:
    h, w = img.shape
    win, stride, nfft = params.window_size, params.stride, params.fft_size
    if h < win or w < win:
        raise ValueError(f"image {w}x{h} smaller than the {win}px analysis window")

    blocks = sliding_window_view(img.astype(np.float64), (win, win))[::stride, ::stride]
    ny, nx = blocks.shape[:2]
    ys = np.arange(ny) * stride
    xs = np.arange(nx) * stride

    means = blocks.mean(axis=(2, 3), keepdims=True)
    tapered = (blocks - means) * _taper(win)
    spectra = np.fft.fft2(tapered, s=(nfft, nfft), axes=(-2, -1))
    power = np.abs(spectra) ** 2

    rad, band, beta2 = _spectral_grids(params)
    pband = np.where(band, power, 0.0)
    tot_band = pband.sum(axis=(2, 3))
    valid = tot_band > 0.0

    w2 = pband * pband
    tot_w2 = w2.sum(axis=(2, 3))
    with np.errstate(invalid="ignore"):
        freq = (w2 * rad).sum(axis=(2, 3)) / np.where(tot_w2 > 0.0, tot_w2, 1.0)
    vec = (pband * beta2).sum(axis=(2, 3))
    ori2 = wrap_pi(np.angle(vec))
    energy = np.log(np.maximum(power.sum(axis=(2, 3)), _LOG_EPS))

    if valid.any() and not valid.all():
        # inherit the nearest valid window's values
        _, (iy, ix) = ndimage.distance_transform_edt(~valid, return_indices=True)
        freq = freq[iy, ix]
        ori2 = ori2[iy, ix]
        energy = energy[iy, ix]
    elif not valid.any():
        freq = np.full((ny, nx), params.freq_lo)
        ori2 = np.zeros((ny, nx))

    return WindowAnalysis(
        ys=ys, xs=xs, tapered=tapered, spectra=spectra,
        frequency=freq, orientation2=ori2, energy=energy, valid=valid,
    )


def _replicate(win_vals: np.ndarray, shape, stride: int) -> np.ndarray:
    """Spread window-grid values to pixels; pixel (y, x) belongs to the
    stride cell of window (y // stride, x // stride), clamped at the edges."""
    h, w = shape
    ny, nx = win_vals.shape
    wi = np.minimum(np.arange(h) // stride, ny - 1)
    wj = np.minimum(np.arange(w) // stride, nx - 1)
    return win_vals[wi[:, None], wj[None, :]]


def _butterworth_response(wa: WindowAnalysis, params: StftParams):
    """Radial and angular Butterworth gains per window, on the fft grid."""
    rad, _, _ = _spectral_grids(params)
    f = np.fft.fftfreq(params.fft_size)
    fy, fx = np.meshgrid(f, f, indexing="ij")
    beta = np.arctan2(-fy, fx)

    f0 = wa.frequency[:, :, None, None]
    bw_r = np.maximum(0.5 * f0, 1.5 / params.fft_size)
    h_rad = 1.0 / (1.0 + ((rad - f0) / bw_r) ** (2 * params.radial_order))

    theta0 = wa.orientation2[:, :, None, None] / 2.0
    dbeta = np.abs(wrap_pi(2.0 * (beta - theta0))) / 2.0
    bw_a = np.pi / 8.0
    h_ang = 1.0 / (1.0 + (dbeta / bw_a) ** (2 * params.angular_order))
    return h_rad * h_ang


def _synthesize(wa: WindowAnalysis, shape, params: StftParams) -> np.ndarray:
    """Root filtering + Butterworth masking + tapered overlap-add."""
    h, w = shape
    win, nfft = params.window_size, params.fft_size
    taper = _taper(win)

    mag = np.abs(wa.spectra)
    filtered = wa.spectra * (mag**params.root_exponent)
    filtered *= _butterworth_response(wa, params)
    back = np.fft.ifft2(filtered, axes=(-2, -1)).real[:, :, :win, :win]

    acc = np.zeros(shape)
    wgt = np.zeros(shape)
    for yi, y0 in enumerate(wa.ys):
        for xi, x0 in enumerate(wa.xs):
            acc[y0:y0 + win, x0:x0 + win] += back[yi, xi] * taper
            wgt[y0:y0 + win, x0:x0 + win] += taper * taper
    return acc / np.maximum(wgt, 1e-6)


def _to_uint8(img: np.ndarray) -> np.ndarray:
    lo = float(img.min())
    hi = float(img.max())
    if hi - lo < 1e-12:
        return np.zeros(img.shape, dtype=np.uint8)
    return np.rint((img - lo) * (255.0 / (hi - lo))).astype(np.uint8)


def stft_analyze(img: np.ndarray, mask: np.ndarray, params: StftParams = None):
    """Analyze one image; returns (enhanced uint8 image, TextureMaps).

    The mask gates the per-image energy normalization and must contain at
    least one foreground pixel.
    """
    params = params if params is not None else StftParams()
    img = np.asarray(img)
    mask = np.asarray(mask, dtype=bool)
    if img.shape != mask.shape:
        raise ValueError(f"image {img.shape} and mask {mask.shape} differ in size")
    if not mask.any():
        raise EmptyMaskError("segmentation mask has no foreground pixels")

    wa = analyze_windows(img, params)
    stride = params.stride

    raw_freq = _replicate(wa.frequency, img.shape, stride)
    ori2 = _replicate(wa.orientation2, img.shape, stride)
    raw_energy = _replicate(wa.energy, img.shape, stride)

    freq_angle = wrap_pi(normalize_to_angle(raw_freq, params.freq_lo, params.freq_hi))
    masked_energy = raw_energy[mask]
    e_lo, e_hi = float(masked_energy.min()), float(masked_energy.max())
    if e_hi - e_lo < 1e-12:
        energy_angle = np.zeros(img.shape)
    else:
        energy_angle = wrap_pi(normalize_to_angle(raw_energy, e_lo, e_hi))

    enhanced = _to_uint8(_synthesize(wa, img.shape, params))
    maps = TextureMaps(
        orientation=ori2,
        frequency=freq_angle,
        energy=energy_angle,
        mask=mask.copy(),
        raw_frequency=raw_freq,
        raw_energy=raw_energy,
        freq_lo=params.freq_lo,
        freq_hi=params.freq_hi,
    )
    return enhanced, maps
