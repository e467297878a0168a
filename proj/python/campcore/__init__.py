"""Multi-skill quadruped gait training core.

Thin re-export of the compiled extension: gait clip generation, the surrogate
environment, adversarial reward formulas, and the gait analysis toolkit.
"""

from campcore._core import (  # noqa: F401
    Command,
    ConfigError,
    DataError,
    GaitSpec,
    MotionClip,
    NumericError,
    QuadrupedEnv,
    Skill,
    UnreachableTargetError,
    compose_reward,
    contact_metrics,
    default_config_json,
    default_skill_catalog,
    dtw_distance,
    generate_clip,
    generate_data,
    kmeans_purity,
    leg_forward_kinematics,
    leg_inverse_kinematics,
    make_skill_catalog,
    pca_project,
    read_clip,
    skill_reward,
    style_reward_from_value,
    tracking_accuracy,
    train,
    write_clip,
)

__all__ = [
    "Command",
    "ConfigError",
    "DataError",
    "GaitSpec",
    "MotionClip",
    "NumericError",
    "QuadrupedEnv",
    "Skill",
    "UnreachableTargetError",
    "compose_reward",
    "contact_metrics",
    "default_config_json",
    "default_skill_catalog",
    "dtw_distance",
    "generate_clip",
    "generate_data",
    "kmeans_purity",
    "leg_forward_kinematics",
    "leg_inverse_kinematics",
    "make_skill_catalog",
    "pca_project",
    "read_clip",
    "skill_reward",
    "style_reward_from_value",
    "tracking_accuracy",
    "train",
    "write_clip",
]
