from typing import Dict, List, Literal, Optional, TypedDict

from typing_extensions import NotRequired


class RateDetails(TypedDict):
    kind: Literal["constant", "piecewise-constant", "damped-cosine", "cosine", "table-lookup"]
    params: List[float]


class ChannelDetails(TypedDict):
    label: str
    operator: List[List[List[float]]]
    rate: RateDetails


class ModelDetails(TypedDict):
    dim: NotRequired[int]
    hamiltonian: NotRequired[List[List[List[float]]]]
    channels: NotRequired[List[ChannelDetails]]
    initial_state: NotRequired[List[List[float]]]
    observables: NotRequired[Dict[str, List[List[List[float]]]]]
    preset: NotRequired[str]
    params: NotRequired[Dict[str, float]]


class BreakdownRecord(TypedDict):
    error: Literal["PositivityBreakdown"]
    step: Optional[int]
    t: Optional[float]
    source_ray: int
    target_ray: int
    channel: str
    rate: float
    target_count: int
    message: str
    source_state: NotRequired[List[List[float]]]


class StepFailureRecord(TypedDict):
    error: Literal["TimestepTooLarge"]
    step: Optional[int]
    t: Optional[float]
    ray: int
    probability: float
    p_max: float
    suggested_dt: float
    message: str


class RunRecord(TypedDict):
    run_id: str
    method: Literal["nmqj", "rk4", "pint"]
    model_digest: str
    config: dict
    seed: NotRequired[Optional[int]]
    version: str
    wall_time: float
    status: Literal["ok", "breakdown", "timestep", "overflow", "propagation"]
    exit_code: int
    outputs: Dict[str, str]
    failure: NotRequired[BreakdownRecord | StepFailureRecord | dict]


class CompareReport(TypedDict):
    run_a: str
    run_b: str
    model_digest: str
    atol: float
    k: float
    passed: bool
    max_difference: List[float]
    worst: Dict[str, float | int | str]
