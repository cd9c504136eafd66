"""Benchmark problem families and their generators."""

from .container import load_instance, save_instance, to_container, from_container
from .mc import (
    McInstance,
    RatingsData,
    RatingsParseError,
    generate_mc,
    load_ratings,
    mc_curvature,
    mc_initial_point,
    mc_instance,
    mc_oracle,
    mc_radius,
)
from .qp import (
    CalibrationError,
    QpInstance,
    calibrated,
    generate_qp,
    power_iteration,
    qp_calibrate,
    qp_initial_point,
    qp_oracle,
    stack_operators,
)
from .quadratic import QuadraticInstance, generate_quadratic, quadratic_oracle
from .svm import SvmInstance, generate_svm, svm_curvature, svm_initial_point, svm_oracle


def oracle_for(inst):
    if isinstance(inst, SvmInstance):
        return svm_oracle(inst)
    if isinstance(inst, QpInstance):
        return qp_oracle(inst)
    if isinstance(inst, McInstance):
        return mc_oracle(inst)
    if isinstance(inst, QuadraticInstance):
        return quadratic_oracle(inst)
    raise TypeError(f"no oracle for {type(inst).__name__}")
