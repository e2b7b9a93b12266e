"""Writes mri_phantom.pgm: the modified Shepp-Logan head phantom at 256x256."""

import sys
from pathlib import Path

import numpy as np
from skimage.data import shepp_logan_phantom
from skimage.transform import resize

size = int(sys.argv[1]) if len(sys.argv) > 1 else 256
img = resize(shepp_logan_phantom(), (size, size), anti_aliasing=True)
img = np.clip(img / img.max(), 0.0, 1.0)
out = Path(__file__).with_name("mri_phantom.pgm")
with open(out, "wb") as f:
    f.write(b"P5\n%d %d\n255\n" % (size, size))
    f.write(np.round(img * 255).astype(np.uint8).tobytes())
print(out)
