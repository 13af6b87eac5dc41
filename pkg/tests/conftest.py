import numpy as np
import pytest

from aodesign import bandshape as bs
from aodesign import bragg, materials as mats
from aodesign.transducer import TransducerSpec


@pytest.fixture(scope="session")
def teo2():
    return mats.teo2()


@pytest.fixture(scope="session")
def design_geometry():
    return bragg.DeviceGeometry(optical_rotation=10.0, acoustic_rotation=3.0,
                                aperture_length=10.0)


@pytest.fixture(scope="session")
def design_transducer():
    return TransducerSpec(shape="diamond", length=8.0, height=4.0)


@pytest.fixture(scope="session")
def tangential_solutions(teo2, design_geometry):
    return {lam: bragg.tangential_match(design_geometry, teo2, lam)
            for lam in (780.0, 480.0)}


@pytest.fixture(scope="session")
def designed_bandshapes(teo2, design_geometry, design_transducer):
    red = bs.designed_bandshape(design_geometry, teo2, 780.0,
                                design_transducer, 0.5)
    blue = bs.designed_bandshape(design_geometry, teo2, 480.0,
                                 design_transducer, 1.0)
    return {"red": red, "blue": blue}


@pytest.fixture(scope="session")
def slow_shear_velocity_110(teo2):
    return mats.slow_shear_mode(teo2, mats.AXIS_110).velocity


def brute_force_christoffel(material, direction):
    """Independent dense-loop eigensolver oracle (no einsum, np.linalg.eig)."""
    n = np.asarray(direction, float)
    n = n / np.linalg.norm(n)
    c4 = np.zeros((3, 3, 3, 3))
    vmap = {(0, 0): 0, (1, 1): 1, (2, 2): 2, (1, 2): 3, (2, 1): 3,
            (0, 2): 4, (2, 0): 4, (0, 1): 5, (1, 0): 5}
    for i in range(3):
        for j in range(3):
            for k in range(3):
                for l in range(3):
                    c4[i, j, k, l] = material.stiffness[vmap[(i, j)],
                                                        vmap[(k, l)]]
    gamma = np.zeros((3, 3))
    for i in range(3):
        for k in range(3):
            acc = 0.0
            for j in range(3):
                for l in range(3):
                    acc += c4[i, j, k, l] * n[j] * n[l]
            gamma[i, k] = acc / material.density
    evals, evecs = np.linalg.eig(gamma)
    order = np.argsort(evals.real)
    vels = np.sqrt(evals.real[order]) / 1e3
    return vels, evecs.real[:, order]
