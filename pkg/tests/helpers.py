"""Builders shared by the tests."""
import numpy as np

from stereofollow.detection import N_KEYPOINTS, Camera, Keypoint, PersonDetection

R_SHOULDER, L_SHOULDER, R_HIP, L_HIP = 2, 5, 8, 11


def make_detection(rs, ls, rh, lh, camera=Camera.LEFT, frame=0, t=0.0, pixels=None,
                   person_id=None, conf=0.9):
    kps = [Keypoint(10.0, 10.0, 0.8, True)] * N_KEYPOINTS
    kps = list(kps)
    for idx, (u, v) in zip((R_SHOULDER, L_SHOULDER, R_HIP, L_HIP), (rs, ls, rh, lh)):
        kps[idx] = Keypoint(float(u), float(v), conf, True)
    if pixels is None:
        pixels = np.zeros((0, 3))
    return PersonDetection(camera, frame, t, tuple(kps), pixels, person_id)


def box_detection(cu, cv, half_w=20.0, half_h=35.0, **kw):
    return make_detection((cu + half_w, cv - half_h), (cu - half_w, cv - half_h),
                          (cu + half_w, cv + half_h), (cu - half_w, cv + half_h), **kw)


def hue_pixels(hue, n=500, std=5.0, sat=0.8, val=0.8, seed=0):
    rng = np.random.default_rng(seed)
    return np.column_stack([(hue + std * rng.normal(size=n)) % 360, np.full(n, sat), np.full(n, val)])
