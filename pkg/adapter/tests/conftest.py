"""Fixtures: a tiny local causal-LM checkpoint built offline.

No hub access needed: the checkpoint is a randomly initialized small
GPT-2 with a character-level tokenizer, saved to disk once per session
and loaded through the same AutoModel/AutoTokenizer path as any real
checkpoint directory.
"""

import sys
from pathlib import Path

import pytest
import torch

ADAPTER_SRC = Path(__file__).resolve().parents[1] / "src"
PRIMARY_SRC = Path(__file__).resolve().parents[2] / "src"
for p in (ADAPTER_SRC, PRIMARY_SRC):
    if str(p) not in sys.path:
        sys.path.insert(0, str(p))


def build_char_tokenizer():
    from tokenizers import Tokenizer, models, pre_tokenizers
    from transformers import PreTrainedTokenizerFast

    vocab = {chr(c): i for i, c in enumerate(range(32, 127))}  # printable ASCII
    vocab["<unk>"] = len(vocab)
    tok = Tokenizer(models.WordLevel(vocab, unk_token="<unk>"))
    tok.pre_tokenizer = pre_tokenizers.Split("", "isolated")
    return PreTrainedTokenizerFast(
        tokenizer_object=tok,
        unk_token="<unk>",
        pad_token="<unk>",
        model_max_length=256,
    )


@pytest.fixture(scope="session")
def checkpoint_dir(tmp_path_factory) -> str:
    from transformers import GPT2Config, GPT2LMHeadModel

    tokenizer = build_char_tokenizer()
    config = GPT2Config(
        vocab_size=len(tokenizer),
        n_positions=256,
        n_embd=32,
        n_layer=2,
        n_head=2,
        bos_token_id=tokenizer.unk_token_id,
        eos_token_id=tokenizer.unk_token_id,
    )
    torch.manual_seed(1234)
    model = GPT2LMHeadModel(config)
    model.eval()

    path = tmp_path_factory.mktemp("checkpoints") / "tiny-char-gpt2"
    model.save_pretrained(path)
    tokenizer.save_pretrained(path)
    return str(path)


@pytest.fixture(scope="session")
def ref_checkpoint_dir(tmp_path_factory) -> str:
    """A second, differently seeded checkpoint for the reference pass."""
    from transformers import GPT2Config, GPT2LMHeadModel

    tokenizer = build_char_tokenizer()
    config = GPT2Config(
        vocab_size=len(tokenizer),
        n_positions=256,
        n_embd=16,
        n_layer=1,
        n_head=2,
        bos_token_id=tokenizer.unk_token_id,
        eos_token_id=tokenizer.unk_token_id,
    )
    torch.manual_seed(99)
    model = GPT2LMHeadModel(config)
    model.eval()

    path = tmp_path_factory.mktemp("checkpoints") / "tiny-char-gpt2-ref"
    model.save_pretrained(path)
    tokenizer.save_pretrained(path)
    return str(path)
