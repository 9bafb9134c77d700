"""edgewatch: edge video-analysis engine for public-safety action detection.

Skeleton pipeline (track -> buffer -> remap -> lift -> preprocess ->
classify -> risk-aggregate) plus a vision-language orchestration layer,
wrapped in a dual-backend service with alert persistence, live broadcast
and an operator dashboard.  All neural models are pluggable; a
deterministic kinematic mock classifier and pose-replay sources make the
whole system verifiable without GPUs.
"""

__version__ = "0.1.0"
