"""
Five ways to encode a click
===========================

One click in the middle of a synthetic sphere, encoded as a disk, a
Gaussian heatmap, a Euclidean distance map, a geodesic distance map and an
exp-geodesic map. We print a profile along x through the click.
"""

import numpy as np

from clickguide import Click, ClickSet, GuidanceConfig, encode, make_phantom

img, gt = make_phantom("sphere", (48, 48, 48))
clicks = ClickSet((Click((24, 24, 24)),))

# sigma is the disk/heatmap radius and the seed dilation for distance maps
configs = {
    "disk": GuidanceConfig(kind="disk", sigma=5),
    "heatmap": GuidanceConfig(kind="heatmap", sigma=5),
    "edt": GuidanceConfig(kind="edt", sigma=1, theta_percent=10),
    "gdt": GuidanceConfig(kind="gdt", sigma=1, theta_percent=10),
    "exp-gdt": GuidanceConfig(kind="exp-gdt", sigma=1, theta_percent=10),
}

xs = np.arange(0, 48, 4)
print("x        " + " ".join(f"{x:5d}" for x in xs))
print("gt       " + " ".join(f"{int(gt.data[x, 24, 24]):5d}" for x in xs))
for name, cfg in configs.items():
    g = encode(clicks, cfg, img)
    print(f"{name:8s} " + " ".join(f"{g.data[x, 24, 24]:5.2f}" for x in xs))

# The geodesic map drops sharply at the sphere wall (x = 9 and x = 39)
# because crossing the 0.2/0.8 edge is expensive. exp-GDT is 0 at the
# click and rises away from it, i.e. it is not inverted.
