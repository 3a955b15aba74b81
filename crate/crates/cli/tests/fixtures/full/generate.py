"""Builds the full fixture corpus and its expected score table.

Outcomes are computed here with shapely and plain pixel-centre enumeration,
independently of the Rust implementation. Run from this directory:

    python3 generate.py
"""

import csv
import json
import math

import numpy as np
from shapely.geometry import LineString, Point, Polygon, box

X0, Y0, CELL, N = 10.0, 0.0, 0.001, 100
PLANTING_YEAR = 2015


def cells(x0, y0, x1, y1):
    return box(X0 + x0 * CELL, Y0 + y0 * CELL, X0 + x1 * CELL, Y0 + y1 * CELL)


def circle(cx, cy, r, n=64):
    return Polygon(
        [(X0 + (cx + r * math.cos(2 * math.pi * k / n)) * CELL, Y0 + (cy + r * math.sin(2 * math.pi * k / n)) * CELL) for k in range(n)]
    )


def point_buffer(lon, lat, radius_m=100.0, n=64):
    # local equirectangular disc; only the shape matters here
    dlat = radius_m / 6371008.8 * 180 / math.pi
    dlon = dlat / math.cos(math.radians(lat))
    return Polygon([(lon + dlon * math.cos(2 * math.pi * k / n), lat + dlat * math.sin(2 * math.pi * k / n)) for k in range(n)])


# rows of the grids run north to south; array[i, j] covers cell column j, row N-1-i
def grid(fill=0):
    return np.full((N, N), fill, dtype=np.int64)


def paint(a, x0, y0, x1, y1, v):
    for cx in range(x0, x1):
        for cy in range(y0, y1):
            a[N - 1 - cy, cx] = v


landcover = grid(1)  # 1 grass, 2 water, 3 bare, 4 stable cropland
built = grid(0)
forest = grid(0)
lossyear = grid(0)
paint(built, 40, 2, 43, 12, 1)  # s03: 30 % built
paint(landcover, 60, 2, 62, 12, 2)  # s04: 20 % water
paint(forest, 80, 2, 85, 12, 1)  # s05: 50 % tree cover
paint(landcover, 2, 20, 6, 30, 3)  # s06: 40 % bare
paint(landcover, 20, 20, 30, 30, 4)  # s07: all cropland
paint(lossyear, 80, 2, 82, 12, 12)  # loss in 2012 inside s05
dem = np.array([[100.0 + 2.0 * j for j in range(N)] for _ in range(N)])

sites = {
    "s01": dict(poly=cells(2, 2, 12, 12), name="Riverside reforestation"),
    "s02": dict(poly=cells(20, 2, 30, 12), name="Hillside tree planting"),
    "s03": dict(poly=cells(40, 2, 50, 12), name="Peri-urban reforestation"),
    "s04": dict(poly=cells(60, 2, 70, 12), name="Lakeshore reforestation"),
    "s05": dict(poly=cells(80, 2, 90, 12), name="Forest edge reforestation"),
    "s06": dict(poly=cells(2, 20, 12, 30), name="Dryland revegetation"),
    "s07": dict(poly=cells(20, 20, 30, 30), name="Farm reforestation"),
    "s08": dict(poly=cells(40, 20, 60, 40), name="Catchment reforestation"),
    "s09": dict(poly=cells(45, 25, 50, 30), name="Catchment reforestation plot"),
    "s10": dict(poly=cells(70, 20, 80, 30), name="Valley reforestation"),
    "s11": dict(poly=cells(75, 25, 85, 35), name="Valley reforestation extension"),
    "s12": dict(poly=circle(15, 55, 5), name="Community woodlot", classification="ARR"),
    "s13": dict(poly=cells(40, 50, 50, 60), name="District reforestation"),
    "s14a": dict(poly=cells(60, 50, 70, 60), name="Twin reforestation"),
    "s14b": dict(poly=cells(60, 50, 70, 60), name="Twin reforestation copy"),
}
point_site = ("s15", X0 + 85 * CELL, Y0 + 85 * CELL)
multi_parts = [cells(2, 70, 8, 76), cells(12, 70, 18, 76)]

admin_units = {"region-a": box(X0, Y0, X0 + N * CELL, Y0 + N * CELL), "district-b": cells(40, 50, 50, 60)}
road = LineString([(X0 + 25 * CELL, Y0 + 0.5 * CELL), (X0 + 25 * CELL, Y0 + 15 * CELL)])


def ring(p):
    return [[round(x, 10), round(y, 10)] for x, y in p.exterior.coords]


def write_asc(path, a, fmt="{:d}"):
    with open(path, "w") as f:
        f.write(f"ncols {N}\nnrows {N}\nxllcorner {X0}\nyllcorner {Y0}\ncellsize {CELL}\nNODATA_value -9999\n")
        for row in a:
            f.write(" ".join(fmt.format(v) for v in row) + "\n")


def feature(props, geom):
    return {"type": "Feature", "properties": props, "geometry": geom}


features = []
for sid, s in sites.items():
    props = {"site_id": sid, "project_id": "p-" + sid[:3], "name": s["name"], "planting_date": f"{PLANTING_YEAR}-06-01", "iso3": "KEN"}
    if "classification" in s:
        props["classification"] = s["classification"]
    features.append(feature(props, {"type": "Polygon", "coordinates": [ring(s["poly"])]}))
features.append(
    feature(
        {"site_id": point_site[0], "project_id": "p-s15", "name": "Schools tree planting", "intervention_year": str(PLANTING_YEAR)},
        {"type": "Point", "coordinates": [point_site[1], point_site[2]]},
    )
)
features.append(
    feature(
        {"site_id": "s16", "project_id": "p-s16", "name": "Smallholder reforestation", "planting_date": f"{PLANTING_YEAR}-03-15"},
        {"type": "MultiPolygon", "coordinates": [[ring(p)] for p in multi_parts]},
    )
)
features.append(
    feature(
        {"site_id": "x01", "project_id": "p-x01", "name": "Improved cookstoves phase 2", "description": "efficient stoves"},
        {"type": "Polygon", "coordinates": [ring(cells(90, 90, 95, 95))]},
    )
)
with open("sites.geojson", "w") as f:
    json.dump({"type": "FeatureCollection", "features": features}, f, indent=1)
    f.write("\n")
with open("metadata.csv", "w", newline="") as f:
    w = csv.writer(f)
    w.writerow(["site_id", "area", "trees_planted"])
    w.writerow(["s01", "123 ha", "5000"])
    w.writerow(["s08", "4.9 km2", ""])

write_asc("landcover.asc", landcover)
write_asc("built.asc", built)
write_asc("forest_2000.asc", forest)
write_asc("lossyear.asc", lossyear)
write_asc("dem.asc", dem, "{:.1f}")
with open("roads.geojson", "w") as f:
    json.dump({"type": "FeatureCollection", "features": [feature({}, {"type": "LineString", "coordinates": [list(c) for c in road.coords]})]}, f)
    f.write("\n")
with open("admin.geojson", "w") as f:
    json.dump(
        {"type": "FeatureCollection", "features": [feature({"name": k}, {"type": "Polygon", "coordinates": [ring(v)]}) for k, v in admin_units.items()]},
        f,
    )
    f.write("\n")

# ---- oracle ----------------------------------------------------------------

polys = {sid: s["poly"] for sid, s in sites.items()}
polys[point_site[0]] = point_buffer(point_site[1], point_site[2])
for k, p in enumerate(multi_parts, 1):
    polys[f"s16#{k}"] = p
point_ids = {point_site[0]}


def centres(p):
    out = []
    minx, miny, maxx, maxy = p.bounds
    for j in range(N):
        for cy in range(N):
            x, y = X0 + (j + 0.5) * CELL, Y0 + (cy + 0.5) * CELL
            if minx <= x <= maxx and miny <= y <= maxy and p.contains(Point(x, y)):
                out.append((N - 1 - cy, j))
    return out


def frac(a, pix, codes):
    return sum(1 for i, j in pix if a[i, j] in codes) / len(pix)


def circularity(p):
    lat = p.centroid.y
    k = math.cos(math.radians(lat))
    q = Polygon([(x * k, y) for x, y in p.exterior.coords])
    return 4 * math.pi * q.area / q.length**2


def ratios(a, b):
    i = a.intersection(b).area
    return i / a.area, i / b.area


ids = sorted(polys)
rows = []
for sid in ids:
    p = polys[sid]
    pix = centres(p)
    assert pix, sid
    road_fail = road.intersection(p).length > 0
    infra_fail = frac(built, pix, {1}) + frac(landcover, pix, {2}) > 0.10
    forest_fail = frac(forest, pix, {1}) >= 0.20
    other_fail = frac(landcover, pix, {3}) >= 0.20
    crop_fail = frac(landcover, pix, {4}) >= 0.20
    nested = inter = False
    for other in ids:
        if other == sid:
            continue
        ra, rb = ratios(p, polys[other])
        if ra > 0.95 and rb > 0.95:
            nested |= other < sid
        elif ra > 0.95:
            nested = True
        elif rb > 0.95:
            pass
        elif ra > 0 or rb > 0:
            inter = True
    best = max(admin_units.items(), key=lambda kv: (min(ratios(p, kv[1])), kv[0]))
    admin_fail = all(r > 0.98 for r in ratios(p, best[1]))
    circle_fail = circularity(p) >= 0.95
    outcomes = [road_fail, infra_fail, forest_fail, other_fail, nested, inter, admin_fail, circle_fail, False, crop_fail]
    cells_out = ["fail" if o else "pass" for o in outcomes]
    passed = cells_out.count("pass")
    rows.append([sid] + cells_out + [passed, 10, str(passed == 10).lower()])

header = [
    "site_id",
    "road_presence",
    "built_area_presence",
    "forest_at_planting_glad",
    "other_landcover_score",
    "nesting_polygon",
    "intersecting_polygon",
    "exact_admin_area",
    "perfect_circle_indicator",
    "geometry_validity",
    "stable_cropland_score",
    "passed",
    "evaluated",
    "perfect",
]
with open("expected_scores.csv", "w", newline="") as f:
    w = csv.writer(f, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
