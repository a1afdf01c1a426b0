"""Translation backends.

Every backend maps a TranslationRequest to an AssemblyFragment.  Jumps and
labels produced by the splitter are mechanical and are emitted here for all
backends; only source-carrying parts reach the model.
"""
from __future__ import annotations

import itertools
import re
import threading
from typing import Optional, Protocol

from ..errors import BackendError, EmptyOutput
from ..frontend.features import token_estimate
from ..mapping import allocate_frame
from . import codegen
from .fragment import AssemblyFragment
from .llm import ChatClient, extract_assembly
from .prompt import SYSTEM, build_prompt
from .request import TranslationRequest


class Backend(Protocol):
    name: str

    def translate(self, req: TranslationRequest) -> AssemblyFragment: ...


def _part_kind(part) -> str:
    k = getattr(part, "kind", None)
    return getattr(k, "value", k)


def mechanical(req: TranslationRequest) -> Optional[AssemblyFragment]:
    """Fragments for Label/jump parts, which need no translator."""
    if req.mode != "lego-part" or req.unit is None:
        return None
    if _part_kind(req.unit) in ("Label", "CondJump", "UncondJump"):
        fn = req.function
        return codegen.translate_part(req.unit, req.symbol_table, fn.name, fn.ret)
    return None


class RefBackend:
    """Deterministic reference compiler for the accepted subset."""

    name = "ref"

    def translate(self, req: TranslationRequest) -> AssemblyFragment:
        if req.mode == "lego-part":
            fn = req.function
            return codegen.translate_part(req.unit, req.symbol_table, fn.name, fn.ret)
        fn = req.unit
        if fn is None:
            raise BackendError("the reference backend needs the parsed function")
        if req.symbol_table is None:
            # a compiler resolves shadowing itself; renaming is how this one does it
            from ..transforms import rename_variables
            fn = rename_variables(fn)[0]
        table = req.symbol_table or allocate_frame(fn, globals_=req.globals)
        return codegen.translate_function(fn, table)


class LLMBackend:
    name = "llm"

    def __init__(self, client: ChatClient):
        self.client = client

    def translate(self, req: TranslationRequest) -> AssemblyFragment:
        frag = mechanical(req)
        if frag is not None:
            return frag
        if req.mode == "lego-part" and not req.source.strip().strip(";").strip():
            return AssemblyFragment()
        raw = self.client.complete(build_prompt(req), system=SYSTEM)
        frag = extract_assembly(raw)
        if not frag.text.strip() and req.source.strip():
            raise EmptyOutput("the model returned an empty code block")
        return frag


# ---------------------------------------------------------------- fault injection

_spin_ids = itertools.count()
_spin_lock = threading.Lock()


def inject(text: str, fault: str, fn_name: str) -> str:
    """Damage an assembly text in a controlled way.

    ``cmp-imm`` yields an assembler error, ``spin`` an endless loop and
    ``off-by-one`` a wrong integer return value.
    """
    if fault == "cmp-imm":
        return "\tcmpl\t$1, $2\n" + text
    if fault == "spin":
        with _spin_lock:
            n = next(_spin_ids)
        lab = f".L_{fn_name}__fault_spin{n}"
        return f"{lab}:\n\tjmp\t{lab}\n" + text
    if fault == "off-by-one":
        ret_jump = re.compile(rf"\s*jmp\s+{re.escape(codegen.epilogue_label(fn_name))}\s*$")
        out = []
        for line in text.splitlines():
            if ret_jump.match(line):
                out.append("\taddq\t$1, %rax")
            out.append(line)
        return "\n".join(out)
    raise ValueError(f"unknown fault {fault!r}")


FAULT_SIGNATURES = {
    "cmp-imm": "operand type mismatch for `cmp'",
    "spin": "timed out",
    "off-by-one": "mismatch",
}


class FaultInjectionBackend:
    """Wraps another backend and damages some of its output.

    policy ``once``: damaged until the feedback carries the diagnostic this
    fault provokes, then clean (a model that learns from its error).
    policy ``always``: damaged on every call.
    policy ``size``: damaged when the part source exceeds ``limit`` tokens,
    a stand-in for models that fail on long inputs.
    """

    name = "fault"

    def __init__(self, fault: str = "cmp-imm", policy: str = "once",
                 inner: Optional[Backend] = None, limit: int = 200,
                 signature: Optional[str] = None):
        if fault not in FAULT_SIGNATURES:
            raise ValueError(f"unknown fault {fault!r}")
        self.fault = fault
        self.policy = policy
        self.inner = inner or RefBackend()
        self.limit = limit
        self.signature = signature or FAULT_SIGNATURES[fault]
        self.calls = 0

    def wants_fault(self, req: TranslationRequest) -> bool:
        if self.policy == "always":
            return True
        if self.policy == "once":
            fb = req.feedback
            return fb is None or self.signature not in fb.diagnostics
        if self.policy == "size":
            return token_estimate(req.source) > self.limit
        raise ValueError(f"unknown policy {self.policy!r}")

    def translate(self, req: TranslationRequest) -> AssemblyFragment:
        self.calls += 1
        frag = self.inner.translate(req)
        if mechanical(req) is not None or not self.wants_fault(req):
            return frag
        fn = req.function if req.mode == "lego-part" else req.unit
        fn_name = getattr(fn, "name", "f")
        if self.fault == "off-by-one" and codegen.epilogue_label(fn_name) not in frag.text:
            return frag
        text = inject(frag.text, self.fault, fn_name)
        return AssemblyFragment.from_text(text, frag.clobbers_note, frag.rodata)


def make_backend(name: str, **kw) -> Backend:
    if name == "ref":
        return RefBackend()
    if name == "llm":
        from .llm import LLMConfig, TokenBucket
        cfg = kw.get("config") or LLMConfig.from_env()
        return LLMBackend(ChatClient(cfg, kw.get("bucket") or TokenBucket()))
    if name == "fault":
        return FaultInjectionBackend(kw.get("fault", "off-by-one"), kw.get("policy", "size"),
                                     limit=kw.get("limit", 200))
    raise BackendError(f"unknown backend {name!r}")


def translate(req: TranslationRequest, backend: Backend) -> AssemblyFragment:
    """Run one request through ``backend``; an empty reply for a non-empty
    source part is an error."""
    frag = backend.translate(req)
    if frag is None:
        raise EmptyOutput("backend returned nothing")
    return frag
