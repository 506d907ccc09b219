"""
Adaptive heatmaps
=================

Each click gets its own radius sigma_i = floor(13 * exp(-0.15 * x)), where
x is the mean geodesic distance over the 3x3x3 block around the click. In a
flat region x is 0 and the radius is the maximum 13; near an edge the
intensity jump raises x and the radius shrinks.
"""

from clickguide import (Click, ClickSet, GeodesicParams, GuidanceConfig, encode, make_phantom,
                        sigma_from_mean_distance)

for x in (0, 1, 2, 5, 10, 20):
    print(f"x = {x:4.1f} -> sigma {sigma_from_mean_distance(x)}")

img, gt = make_phantom("sphere", (64, 64, 64))
# one click at the centre, one on the last voxel inside the wall (radius 20)
clicks = ClickSet((Click((32, 32, 32)), Click((52, 32, 32))))
g = encode(clicks, GuidanceConfig(kind="adaptive"), img)
for c, s in zip(clicks, g.per_click_sigmas):
    print(c.pos, "sigma", s)

# a larger gamma makes the edge count for more
sharp = GeodesicParams(gamma=10.0, spatial_weight=0.0)
g = encode(clicks, GuidanceConfig(kind="adaptive", adaptive_geodesic=sharp), img)
print("gamma 10:", g.per_click_sigmas)

# The distance map is computed from all clicks of the polarity, so a click
# placed in the flat background also floods the outside with distance 0.
