# Copyright 2026 The ctcseg Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Segment long transcripts against CTC label posteriors.

The heavy lifting lives in the compiled extension ``_ctcseg``; this package
re-exports its public surface.
"""

from ._ctcseg import (  # noqa: F401
    AlignConfig,
    AugmentResult,
    BrutePath,
    DropPolicy,
    EncodedText,
    EncodeError,
    EvalReport,
    FrameAlignment,
    InfeasibleTextError,
    InvalidInputError,
    IoError,
    NoPathError,
    NormalizationRules,
    NormalizeResult,
    PlantedUtterance,
    PosteriorMatrix,
    Segment,
    SegmentManifest,
    SkippedUtterance,
    SynthResult,
    SynthSpec,
    TokenTable,
    TranscriptSet,
    Trellis,
    Utterance,
    UtteranceSpan,
    WindowError,
    align,
    augment,
    backtrack,
    brute_force_best_path,
    compute_trellis,
    compute_trellis_windowed,
    decode,
    encode,
    evaluate,
    extract_segments,
    generate,
    normalize,
    read_posteriors,
    read_rules,
    read_segments,
    read_synth_spec,
    read_token_table,
    read_transcripts,
    rules_from_token_table,
    transcript_of,
    write_posteriors,
    write_segments,
)

__all__ = [
    "AlignConfig",
    "AugmentResult",
    "BrutePath",
    "DropPolicy",
    "EncodedText",
    "EncodeError",
    "EvalReport",
    "FrameAlignment",
    "InfeasibleTextError",
    "InvalidInputError",
    "IoError",
    "NoPathError",
    "NormalizationRules",
    "NormalizeResult",
    "PlantedUtterance",
    "PosteriorMatrix",
    "Segment",
    "SegmentManifest",
    "SkippedUtterance",
    "SynthResult",
    "SynthSpec",
    "TokenTable",
    "TranscriptSet",
    "Trellis",
    "Utterance",
    "UtteranceSpan",
    "WindowError",
    "align",
    "augment",
    "backtrack",
    "brute_force_best_path",
    "compute_trellis",
    "compute_trellis_windowed",
    "decode",
    "encode",
    "evaluate",
    "extract_segments",
    "generate",
    "normalize",
    "read_posteriors",
    "read_rules",
    "read_segments",
    "read_synth_spec",
    "read_token_table",
    "read_transcripts",
    "rules_from_token_table",
    "transcript_of",
    "write_posteriors",
    "write_segments",
]

__version__ = "1.0.0"
