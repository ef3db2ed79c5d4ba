"""Walk a synthetic fingerprint-like image through the enhancement stack.

Generates an oriented ridge pattern with noise and a faded border, then runs
segmentation, spectral analysis, contextual filtering and normalization, and
writes every intermediate product as an image you can eyeball.

Run:  python3 demos/01_enhancement.py [out_dir]
"""

import os
import sys

import numpy as np

from mtcc import image_io
from mtcc.angles import wrap_pi
from mtcc.enhancement import enhance_pipeline, segment
from mtcc.stft import stft_analyze
from mtcc.synthetic import ridge_image

OUT = sys.argv[1] if len(sys.argv) > 1 else os.path.join("demos", "out", "enhancement")

rng = np.random.default_rng(7)
shape = (320, 320)
true_freq = 0.11
true_theta = 0.6  # wave-vector angle, y axis up

img = ridge_image(shape, freq=true_freq, orientation=true_theta,
                  contrast=85.0, noise=14.0, rng=rng).astype(np.float64)

# fade the ridges out toward the border so segmentation has work to do
yy, xx = np.mgrid[0 : shape[0], 0 : shape[1]].astype(np.float64)
r = np.hypot(xx - shape[1] / 2, yy - shape[0] / 2) / (shape[0] / 2)
fade = np.clip(1.7 - 1.9 * r, 0.0, 1.0)
img = np.clip(np.rint(127.5 + (img - 127.5) * fade), 0, 255).astype(np.uint8)

os.makedirs(OUT, exist_ok=True)
image_io.save_gray(img, os.path.join(OUT, "input.pgm"))

mask = segment(img)
print(f"segmentation: {mask.mean():6.1%} of pixels kept as foreground")

stft_img, maps = stft_analyze(img, mask)
freq = maps.ridge_frequency()[mask]
ori2 = maps.orientation[mask]
print(f"spectral analysis: median ridge frequency {np.median(freq):.4f} "
      f"(generator used {true_freq})")
print(f"                   median doubled orientation {np.median(ori2):+.3f} "
      f"(generator used {float(wrap_pi(2.0 * true_theta)):+.3f})")

enhanced, _ = enhance_pipeline(img)
print(f"enhancement: output range {enhanced.min()}..{enhanced.max()}, "
      f"foreground mean {enhanced[mask].mean():.1f}")

image_io.save_gray(mask.astype(np.uint8) * 255, os.path.join(OUT, "mask.pgm"))
image_io.save_gray(stft_img, os.path.join(OUT, "bandpass.pgm"))
image_io.save_gray(enhanced, os.path.join(OUT, "enhanced.pgm"))
image_io.save_map_pgm(maps.orientation, os.path.join(OUT, "orientation.pgm"))
image_io.save_map_pgm(maps.frequency, os.path.join(OUT, "frequency.pgm"))
image_io.save_map_pgm(maps.energy, os.path.join(OUT, "energy.pgm"))
print(f"wrote input/mask/bandpass/enhanced plus 3 map images to {OUT}/")
