"""Build audio-editing pair datasets, derive difference and commonality
captioning targets, and score caption predictions."""

from .audio_core import AudioClip, MixParams, gain_for_snr, load_wav, mix, resample, rms, save_wav
from .commonality import derive_commonality, longest_common_word_substring
from .corpus import CaptionedBase, Category, SoundEvent, Triple, load_base_corpus, load_event_library, sample_triples
from .edit_synth import EditOp, EditPair, render_instruction, render_mixed_caption, synthesize_six
from .manifest import InstructionSample, SplitSpec, Task
from .metrics import EvalInstance, MetricReport, evaluate_corpus
from .text import TokenSeq, normalize_caption

__version__ = "0.1.0"
