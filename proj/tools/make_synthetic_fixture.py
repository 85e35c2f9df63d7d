#!/usr/bin/env python3
"""Regenerate tests/fixtures/synthetic.

Twelve analyzable sites in three cities plus two flagged sites. Each site has
a latent vector; sound and street embeddings are that latent plus a little
noise, aerial embeddings plus a lot, so street~sound should correlate more
strongly than aerial~sound. Rasters and audio labels are drawn from the same
latent.

The committed golden report was produced once from this output with
    soundscape pipeline --manifest tests/fixtures/synthetic/manifest.csv \
        --features tests/fixtures/synthetic/features --out <dir> \
        --seed 42 --permutations 999
run from the repository root.
"""

import json
import pathlib

import numpy as np

ROOT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "synthetic"
DIM = 32
SIDE = 8

CITIES = [("Alder", "A", 51.5, -0.1), ("Birch", "B", 35.7, 139.7), ("Cedar", "C", 40.7, -74.0)]
STREET_LEGEND = {0: "Road", 1: "Sidewalk", 2: "Building", 3: "Vegetation", 4: "Car", 5: "Sky"}
AERIAL_LEGEND = {0: "Grassland", 1: "Forest", 2: "Waterbody", 3: "Road/Sidewalk", 4: "Building",
                 5: "Cropland"}


def real(v):
    return float.__repr__(float(v))


def raster(rng, weights, legend):
    p = np.exp(weights - weights.max())
    p /= p.sum()
    cells = rng.choice(len(legend), size=(SIDE, SIDE), p=p)
    return {"width": SIDE, "height": SIDE,
            "legend": {str(k): v for k, v in legend.items()},
            "rows": cells.tolist()}


def main():
    rng = np.random.default_rng(20240611)
    sites = []
    for city, prefix, lat, lon in CITIES:
        for k in range(1, 5):
            sites.append((f"{prefix}{k:03d}", city, lat + 0.01 * k, lon + 0.01 * k, ""))
    sites.append(("A900", "Alder", 51.6, -0.2, "indoor"))
    sites.append(("C900", "Cedar", 40.8, -74.1, "speech_dominated;transient_event"))

    feats = ROOT / "features"
    (feats / "rasters").mkdir(parents=True, exist_ok=True)

    with open(ROOT / "manifest.csv", "w", newline="\n") as f:
        f.write("site_id,city,lat,lon,audio_path,street_image_path,aerial_image_path,flags\n")
        for sid, city, lat, lon, flags in sites:
            f.write(f"{sid},{city},{lat:.4f},{lon:.4f},audio/{sid}.wav,"
                    f"street/{sid}.jpg,aerial/{sid}.png,{flags}\n")

    embeddings, clips, labels = [], [], []
    urban = {}
    for sid, *_ in sites:
        z = rng.normal(size=DIM)
        u = float(np.tanh(z[:4].sum() / 2))  # -1 green .. +1 built-up
        urban[sid] = u
        street = z + 0.3 * rng.normal(size=DIM)
        aerial = z + 1.5 * rng.normal(size=DIM)
        sound = z + 0.3 * rng.normal(size=DIM)
        for modality, vec in (("street", street), ("aerial", aerial)):
            embeddings.append({"site_id": sid, "modality": modality, "model_id": f"synthetic-{modality}",
                               "dim": DIM, "vector": vec})
        if sid == "B002":
            # Sound from per-clip records only, exercising clip aggregation.
            for clip in range(3):
                clips.append({"site_id": sid, "clip": clip, "model_id": "synthetic-sound",
                              "dim": DIM, "vector": sound + 0.1 * rng.normal(size=DIM)})
        else:
            embeddings.append({"site_id": sid, "modality": "sound", "model_id": "synthetic-sound",
                               "dim": DIM, "vector": sound})

        green = np.array([0.0, 0.0, 0.5, 1.5, 0.0, 0.3]) * -u
        built = np.array([1.0, 0.6, 1.2, 0.0, 0.8, 0.0]) * u
        street_r = raster(rng, green + built + 0.3 * rng.normal(size=6), STREET_LEGEND)
        aerial_w = np.array([-1.0, -1.2, -0.3, 0.9, 1.2, -0.5]) * u + 0.8 * rng.normal(size=6)
        aerial_r = raster(rng, aerial_w, AERIAL_LEGEND)
        for view, r in (("street", street_r), ("aerial", aerial_r)):
            with open(feats / "rasters" / f"{sid}.{view}.json", "w") as f:
                json.dump(r, f)
                f.write("\n")

        logits = np.array([-1.5 * u, 0.0, 1.5 * u]) + 0.3 * rng.normal(size=3)
        p = np.exp(logits) / np.exp(logits).sum()
        labels.append({"site_id": sid, "labels": {"bird": round(float(p[0]), 6),
                                                  "wind": round(float(p[1]), 6),
                                                  "traffic": round(float(p[2]), 6),
                                                  "rustle": 0.05}})

    def dump_jsonl(path, records):
        with open(path, "w") as f:
            for r in records:
                fields = []
                for k, v in r.items():
                    if k == "vector":
                        fields.append('"vector":[' + ",".join(real(x) for x in v) + "]")
                    else:
                        fields.append(json.dumps(k) + ":" + json.dumps(v, separators=(",", ":")))
                f.write("{" + ",".join(fields) + "}\n")

    dump_jsonl(feats / "embeddings.jsonl", embeddings)
    dump_jsonl(feats / "sound_clips.jsonl", clips)
    dump_jsonl(feats / "audio_labels.jsonl", labels)
    with open(feats / "audio_bga.json", "w") as f:
        json.dump({"view": "audio_custom",
                   "weights": {"bird": [1.0, 0.0, 0.0], "wind": [0.0, 1.0, 0.0],
                               "traffic": [0.0, 0.0, 1.0]}}, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
