"""On-disk dataset formats: binary feature files, detection/annotation
JSON Lines, the category map and the train/val manifest.
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .visual import ActivityFeatures, CategoryMap, Detection

FEAT_MAGIC = b"FEAT"
FEAT_VERSION = 1


@dataclass
class AnnotatedSample:
    """One (video, query, span) tuple joined with its features and detections."""

    video_id: str
    query: str
    t_start_s: float
    t_end_s: float
    duration_s: float
    features: ActivityFeatures
    detections: list[list[Detection]]  # one list per feature row / keyframe


def write_features(af: ActivityFeatures, path: str) -> None:
    t, d_v = af.features.shape
    with open(path, "wb") as f:
        f.write(FEAT_MAGIC)
        f.write(struct.pack("<I", FEAT_VERSION))
        vid = af.video_id.encode("utf-8")
        f.write(struct.pack("<Q", len(vid)))
        f.write(vid)
        f.write(struct.pack("<QQ", t, d_v))
        f.write(struct.pack("<dd", af.stride_seconds, af.duration_seconds))
        f.write(np.ascontiguousarray(af.features, dtype="<f8").tobytes())


def read_features(path: str) -> ActivityFeatures:
    with open(path, "rb") as f:
        blob = f.read()
    if blob[:4] != FEAT_MAGIC:
        raise DataError(f"{path}: bad magic bytes")
    (version,) = struct.unpack_from("<I", blob, 4)
    if version != FEAT_VERSION:
        raise DataError(f"{path}: unsupported feature-file version {version}")
    try:
        (vid_len,) = struct.unpack_from("<Q", blob, 8)
        offset = 16
        video_id = blob[offset : offset + vid_len].decode("utf-8")
        offset += vid_len
        t, d_v = struct.unpack_from("<QQ", blob, offset)
        offset += 16
        stride, duration = struct.unpack_from("<dd", blob, offset)
        offset += 16
        feats = np.frombuffer(blob, dtype="<f8", count=t * d_v, offset=offset).copy().reshape(t, d_v)
    except (struct.error, ValueError, UnicodeDecodeError) as exc:
        raise DataError(f"{path}: truncated or corrupt feature file: {exc}")
    return ActivityFeatures(video_id=video_id, features=feats, stride_seconds=stride, duration_seconds=duration)


def write_detections(video_id: str, per_frame: list[list[Detection]], path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for frame_index, dets in enumerate(per_frame):
            record = {
                "video_id": video_id,
                "frame_index": frame_index,
                "detections": [
                    {"label": d.label, "confidence": d.confidence, "feature": d.feature.tolist()}
                    for d in dets
                ],
            }
            f.write(json.dumps(record) + "\n")


def read_detections(path: str) -> dict[int, list[Detection]]:
    """Frame index -> detection list for one video."""
    frames: dict[int, list[Detection]] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                frames[int(rec["frame_index"])] = [
                    Detection(d["label"], d["confidence"], np.array(d["feature"], dtype=np.float64))
                    for d in rec["detections"]
                ]
            except (KeyError, ValueError, TypeError) as exc:
                raise DataError(f"{path}:{lineno}: malformed detection record: {exc}")
    return frames


def write_category_map(cmap: CategoryMap, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(cmap.as_dict(), f, indent=2, sort_keys=True)


def read_category_map(path: str) -> CategoryMap:
    with open(path, encoding="utf-8") as f:
        try:
            return CategoryMap(json.load(f))
        except (ValueError, AttributeError) as exc:
            raise DataError(f"{path}: malformed category map: {exc}")


def write_annotations(samples: list[AnnotatedSample], path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for s in samples:
            f.write(
                json.dumps(
                    {
                        "video_id": s.video_id,
                        "query": s.query,
                        "t_start_s": s.t_start_s,
                        "t_end_s": s.t_end_s,
                        "duration_s": s.duration_s,
                    }
                )
                + "\n"
            )


def read_annotations(path: str) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                row = {
                    "video_id": str(rec["video_id"]),
                    "query": str(rec["query"]),
                    "t_start_s": float(rec["t_start_s"]),
                    "t_end_s": float(rec["t_end_s"]),
                    "duration_s": float(rec["duration_s"]),
                }
            except (KeyError, ValueError, TypeError) as exc:
                raise DataError(f"{path}:{lineno}: malformed annotation: {exc}")
            if row["t_start_s"] > row["t_end_s"]:
                raise DataError(f"{path}:{lineno}: t_start_s > t_end_s")
            rows.append(row)
    return rows


def write_manifest(train_ids: list[str], val_ids: list[str], path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump({"train": train_ids, "val": val_ids}, f, indent=2)


def read_manifest(path: str) -> tuple[list[str], list[str]]:
    with open(path, encoding="utf-8") as f:
        try:
            data = json.load(f)
            return list(data["train"]), list(data["val"])
        except (ValueError, KeyError, TypeError) as exc:
            raise DataError(f"{path}: malformed manifest: {exc}")


def write_dataset(samples: list[AnnotatedSample], cmap: CategoryMap, out_dir: str, val_fraction: float = 0.2) -> None:
    """Lay out a dataset directory: features/, detections/, annotations,
    category map and an 80/20 by-video manifest."""
    os.makedirs(os.path.join(out_dir, "features"), exist_ok=True)
    os.makedirs(os.path.join(out_dir, "detections"), exist_ok=True)
    by_video: dict[str, AnnotatedSample] = {}
    for s in samples:
        by_video.setdefault(s.video_id, s)
    for vid, s in by_video.items():
        write_features(s.features, os.path.join(out_dir, "features", f"{vid}.feat"))
        write_detections(vid, s.detections, os.path.join(out_dir, "detections", f"{vid}.jsonl"))
    write_annotations(samples, os.path.join(out_dir, "annotations.jsonl"))
    write_category_map(cmap, os.path.join(out_dir, "category_map.json"))
    video_ids = sorted(by_video)
    n_val = max(1, int(round(len(video_ids) * val_fraction)))
    write_manifest(video_ids[:-n_val], video_ids[-n_val:], os.path.join(out_dir, "manifest.json"))


def load_annotations(path: str, features_dir: str, detections_dir: str) -> list[AnnotatedSample]:
    """Parse annotations and join against per-video feature/detection files."""
    rows = read_annotations(path)
    feature_cache: dict[str, ActivityFeatures] = {}
    detection_cache: dict[str, dict[int, list[Detection]]] = {}
    samples = []
    for row in rows:
        vid = row["video_id"]
        if vid not in feature_cache:
            fpath = os.path.join(features_dir, f"{vid}.feat")
            if not os.path.exists(fpath):
                raise DataError(f"missing feature file for video '{vid}' ({fpath})")
            feature_cache[vid] = read_features(fpath)
            dpath = os.path.join(detections_dir, f"{vid}.jsonl")
            detection_cache[vid] = read_detections(dpath) if os.path.exists(dpath) else {}
        feats = feature_cache[vid]
        frames = detection_cache[vid]
        samples.append(
            AnnotatedSample(
                video_id=vid,
                query=row["query"],
                t_start_s=row["t_start_s"],
                t_end_s=row["t_end_s"],
                duration_s=row["duration_s"],
                features=feats,
                detections=[frames.get(i, []) for i in range(feats.features.shape[0])],
            )
        )
    return samples


def load_dataset(data_dir: str) -> tuple[list[AnnotatedSample], list[AnnotatedSample], CategoryMap]:
    """Load a dataset directory into (train, val, category_map) using the manifest."""
    samples = load_annotations(
        os.path.join(data_dir, "annotations.jsonl"),
        os.path.join(data_dir, "features"),
        os.path.join(data_dir, "detections"),
    )
    cmap = read_category_map(os.path.join(data_dir, "category_map.json"))
    train_ids, val_ids = read_manifest(os.path.join(data_dir, "manifest.json"))
    train_set, val_set = set(train_ids), set(val_ids)
    train = [s for s in samples if s.video_id in train_set]
    val = [s for s in samples if s.video_id in val_set]
    return train, val, cmap
