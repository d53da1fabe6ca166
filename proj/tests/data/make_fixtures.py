"""Writes the NIfTI fixtures used by test_volume_io with nibabel and checks
each one back through nibabel. Run from any directory:

    python3 tests/data/make_fixtures.py
"""
import gzip
import shutil
import struct
from pathlib import Path

import nibabel as nib
import numpy as np

HERE = Path(__file__).resolve().parent


def save(data, affine, name, dtype):
    img = nib.Nifti1Image(np.asarray(data, dtype=dtype), affine)
    img.header.set_data_dtype(dtype)
    path = HERE / name
    nib.save(img, str(path))
    return path


def patch_float(path, offset, value):
    raw = bytearray(path.read_bytes())
    raw[offset:offset + 4] = struct.pack("<f", value)
    path.write_bytes(bytes(raw))


def main():
    # 1x1x1 voxel, 2 mm isotropic, value 1.
    p = save(np.ones((1, 1, 1)), np.diag([2.0, 2.0, 2.0, 1.0]), "single_voxel_2mm.nii", np.uint8)
    with open(p, "rb") as src, gzip.open(HERE / "single_voxel_2mm.nii.gz", "wb") as dst:
        shutil.copyfileobj(src, dst)
    img = nib.load(str(HERE / "single_voxel_2mm.nii.gz"))
    assert img.shape == (1, 1, 1) and img.header.get_zooms() == (2.0, 2.0, 2.0)
    assert np.asarray(img.dataobj).tolist() == [[[1]]]

    # int16 labels with value i + 10 j + 100 k, anisotropic spacing, offset origin.
    i, j, k = np.meshgrid(np.arange(4), np.arange(3), np.arange(2), indexing="ij")
    affine = np.array([[0.7, 0, 0, -10.0], [0, 0.8, 0, 20.0], [0, 0, 2.5, 5.0], [0, 0, 0, 1]])
    save(i + 10 * j + 100 * k, affine, "ramp_int16_4x3x2.nii.gz", np.int16)
    img = nib.load(str(HERE / "ramp_int16_4x3x2.nii.gz"))
    assert np.asarray(img.dataobj)[3, 2, 1] == 123
    assert np.allclose(img.header.get_zooms(), (0.7, 0.8, 2.5))

    # float32 labels that must be rounded.
    save(np.array([[[0.0], [2.6]], [[1.0000001], [0.4]]]), np.eye(4), "float_labels_2x2x1.nii", np.float32)

    # pixdim z = 0 in the header; the affine itself is left valid.
    p = save(np.ones((2, 2, 2)), np.eye(4), "pixdim_z_zero.nii", np.uint8)
    patch_float(p, 76 + 4 * 3, 0.0)
    assert struct.unpack_from("<f", p.read_bytes(), 76 + 4 * 3)[0] == 0.0

    # NaN voxel.
    save(np.array([[[1.0, np.nan]]]), np.eye(4), "nan_voxel.nii", np.float32)

    # Genuinely 4D image.
    save(np.zeros((2, 2, 2, 2)), np.eye(4), "four_d.nii", np.uint8)

    # 30 degree rotation about z.
    c, s = np.cos(np.pi / 6), np.sin(np.pi / 6)
    save(np.ones((2, 2, 2)), np.array([[c, -s, 0, 0], [s, c, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]), "oblique.nii", np.uint8)

    # uint16 label above 255.
    save(np.array([[[0, 300], [65535, 7]]]), np.diag([0.5, 0.5, 1.25, 1.0]), "labels_uint16.nii", np.uint16)


if __name__ == "__main__":
    main()
