"""banglabot: NLU and dialogue engine for a Bangla/banglish FAQ assistant.

Subpackages cover the full life cycle: corpus files and synthetic data
(`corpus`, `synthetic`), tokenizers and featurizers (`tokenizers`,
`features`), the joint intent+entity classifier (`joint_model`), prediction
post-processing (`postprocess`), the dialogue core (`dialogue`, `ted`),
the evaluation/ablation harness (`evaluation`), the HTTP gateway
(`gateway`) and the command line (`cli`).
"""

__version__ = "0.1.0"
