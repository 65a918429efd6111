"""Deterministic CSV output."""
import csv
import io
import math

import numpy as np

__all__ = ["SCHEMAS", "format_value", "write_csv", "render_csv"]

SCHEMAS = {
    "eigen": ("label", "sigma", "E0_Hz", "E2corr_Hz", "Eexact_Hz", "diff0_Hz", "diff2_Hz"),
    "compile": ("gate", "context", "nu_Hz", "Delta_Hz", "K", "B1_T", "Omega_Hz", "tau_s",
                "eps_e", "eps_n", "sqrtPe"),
    "sweep": ("axis_value", "mean_P", "std_P", "n_realizations", "n_ambiguous_points"),
    "trajectory": ("t_s", "Ix", "Iy", "Iz"),
    "relax_summary": ("xi", "delta_Iz", "flipped", "eta", "B0_min_T", "Iz_final", "step_s",
                      "norm_drift"),
    "validate": ("condition", "description", "ratio", "threshold", "passed"),
    "protocol_summary": ("P", "pop_0", "pop_15", "theta_rad", "total_time_s", "norm"),
}


def format_value(v):
    """Floats in scientific notation with 13 significant digits."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.12e}"
    if v is None:
        return ""
    return str(v)


def _rows(records, schema):
    for rec in records:
        if isinstance(rec, dict):
            if set(rec) != set(schema):
                raise ValueError(f"record keys {sorted(rec)} do not match schema {list(schema)}")
            yield [format_value(rec[k]) for k in schema]
        else:
            rec = list(rec)
            if len(rec) != len(schema):
                raise ValueError(f"record has {len(rec)} fields, schema has {len(schema)}")
            yield [format_value(v) for v in rec]


def render_csv(records, schema):
    """CSV text with a header row and one row per record."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(schema)
    w.writerows(_rows(records, schema))
    return buf.getvalue()


def write_csv(records, schema, path):
    if isinstance(schema, str):
        schema = SCHEMAS[schema]
    text = render_csv(records, schema)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path
