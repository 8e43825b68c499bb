"""JSON schemas for machine-readable CLI output."""

_num = {"type": "number"}
_opt_num = {"type": ["number", "null"]}
_bound = {"anyOf": [{"type": "number"}, {"const": "overflow"}, {"type": "null"}]}

CERTIFICATE = {
    "type": "object",
    "required": ["t_exit", "recurrences", "miss_tol", "status", "evaluations"],
    "properties": {
        "t_exit": _opt_num,
        "recurrences": {"type": "array", "items": _num},
        "miss_tol": _num,
        "status": {"enum": ["Exited", "NeverExitsAnalytic", "HorizonExhausted"]},
        "evaluations": {"type": "integer", "minimum": 0},
    },
}

MOMENTS = {
    "type": "object",
    "required": ["mean", "second_moment", "variance", "fourth_central", "eps_star", "lipschitz"],
    "properties": {k: _num for k in
                   ["mean", "second_moment", "variance", "fourth_central", "eps_star", "lipschitz"]},
}

BOUNDS = {
    "type": "object",
    "required": ["eps", "d", "eps_star", "mt_lower", "thm2_upper", "thm1_rec_upper",
                 "concrete_rec_upper", "unitary_exit_upper", "finite_exit"],
    "properties": {
        "eps": _num,
        "d": {"type": "integer"},
        "eps_star": _num,
        "mt_lower": _opt_num,
        "thm2_upper": _opt_num,
        "thm1_rec_upper": _bound,
        "kth_rec_upper": _bound,
        "concrete_rec_upper": _bound,
        "reduced_rec_upper": _bound,
        "reduced_rec_improved": _bound,
        "free_rec_upper": _bound,
        "unitary_exit_upper": _opt_num,
        "unitary_rec_upper": _bound,
        "finite_exit": {"type": "boolean"},
    },
}

FINITE = {
    "type": "object",
    "required": ["finite", "infimum", "threshold", "caveat"],
    "properties": {
        "finite": {"type": "boolean"},
        "infimum": _num,
        "threshold": _num,
        "caveat": {"type": "string"},
    },
}

COVER = {
    "type": "object",
    "required": ["max_distance", "pass", "samples"],
    "properties": {
        "max_distance": _num,
        "pass": {"type": "boolean"},
        "samples": {"type": "integer", "minimum": 1},
    },
}

DIAMOND = {
    "type": "object",
    "required": ["distance"],
    "properties": {"distance": _num},
}

ENSEMBLE = {
    "type": "object",
    "required": ["config", "trials", "window_fraction", "exit_window_fraction",
                 "t_exit_quantiles", "t_rec_quantiles", "censored"],
    "properties": {
        "trials": {"type": "integer", "minimum": 1},
        "window_fraction": _num,
        "exit_window_fraction": _num,
        "joint_fraction": _num,
        "sandwich_violations": {"type": "integer"},
        "t_exit_quantiles": {"type": "object", "additionalProperties": _num},
        "t_rec_quantiles": {"type": "object", "additionalProperties": _num},
        "censored": {"type": "integer"},
    },
}

SWEEP = {
    "type": "object",
    "required": ["summaries", "scaling"],
    "properties": {
        "summaries": {"type": "object", "additionalProperties": ENSEMBLE},
        "scaling": {
            "type": "object",
            "required": ["dims", "median_log_t_rec", "slope", "ci95", "positive"],
        },
    },
}

PROXIMITY = {
    "type": "object",
    "required": ["estimate", "ci95", "hits", "trials", "bound", "bound_log10", "vacuous"],
}

SCENARIO = {
    "type": "object",
    "required": ["reports", "monotone"],
    "properties": {
        "reports": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["epsilon", "ratio", "t_exit", "n_recurrences", "max_gap",
                             "max_gap_over_t_exit", "status"],
            },
        },
        "monotone": {"type": "boolean"},
    },
}

BY_COMMAND = {
    "moments": MOMENTS,
    "exit": CERTIFICATE,
    "recur": CERTIFICATE,
    "bounds": BOUNDS,
    "finite": FINITE,
    "cover-check": COVER,
    "diamond": DIAMOND,
    "ensemble": ENSEMBLE,
    "proximity": PROXIMITY,
    "scenario": SCENARIO,
}
