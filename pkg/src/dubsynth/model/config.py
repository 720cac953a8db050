"""Model hyperparameters."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

# Fixed by the reference-encoder architecture, not configurable: five conv
# layers with kernel size 3 feeding one bidirectional recurrent layer.
REF_ENCODER_CONV_LAYERS = 5
REF_ENCODER_KERNEL = 3


@dataclass(frozen=True)
class ModelConfig:
    num_phonemes: int
    num_speakers: int
    num_languages: int

    # spectrogram geometry; must match the corpus frame parameters
    sample_rate_hz: int = 16000
    n_fft: int = 1024
    hop: int = 160
    win_length: int = 400

    # text encoder
    text_hidden: int = 192
    text_layers: int = 2
    text_heads: int = 2

    # variational reference encoders
    prosody_dim: int = 32
    noise_dim: int = 16
    ref_channels: int = 128  # paper-scale value is 512

    # latent chain
    latent_dim: int = 64
    posterior_hidden: int = 192
    flow_hidden: int = 192
    flow_blocks: int = 4
    prior_hidden: int = 192

    # decoder
    decoder_channels: int = 384
    upsample_rates: tuple[int, ...] = (5, 4, 4, 2)

    # conditioning
    speaker_dim: int = 32
    language_dim: int = 16
    conditioning_mode: str = "add"  # or "concat_project"
    prosody_input: str = "linear"  # or "posterior"

    # variants
    noise_modelling: bool = False
    adversarial_enabled: bool = False

    def __post_init__(self):
        dims = (self.text_hidden, self.prosody_dim, self.noise_dim, self.ref_channels,
                self.latent_dim, self.posterior_hidden, self.flow_hidden,
                self.prior_hidden, self.decoder_channels, self.speaker_dim,
                self.language_dim)
        if any(d <= 0 for d in dims):
            raise ValueError("all model dims must be positive")
        rate_product = 1
        for r in self.upsample_rates:
            rate_product *= r
        if rate_product != self.hop:
            raise ValueError(
                f"upsample rates {self.upsample_rates} multiply to {rate_product}, "
                f"but hop is {self.hop}"
            )
        if self.latent_dim % 2 != 0:
            raise ValueError("latent_dim must be even (flow couplings split it in half)")
        if self.conditioning_mode not in ("add", "concat_project"):
            raise ValueError(f"unknown conditioning_mode: {self.conditioning_mode}")
        if self.prosody_input not in ("linear", "posterior"):
            raise ValueError(f"unknown prosody_input: {self.prosody_input}")

    @property
    def linear_bins(self) -> int:
        return self.n_fft // 2 + 1

    @property
    def conditioning_dim(self) -> int:
        return self.speaker_dim + self.language_dim

    def to_dict(self) -> dict:
        d = asdict(self)
        d["upsample_rates"] = list(self.upsample_rates)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        d = dict(d)
        d["upsample_rates"] = tuple(d["upsample_rates"])
        return cls(**d)
