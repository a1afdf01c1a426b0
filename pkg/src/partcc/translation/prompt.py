"""Prompt construction for chat-model backends.

``build_prompt`` is a pure function of the request: no clocks, no random
state, dictionary iteration only over fixed tuples.
"""
from __future__ import annotations

from .request import TranslationRequest

SYSTEM = ("You translate C into x86-64 assembly for the GNU assembler, AT&T syntax. "
          "Reply with exactly one fenced code block containing only assembly.")

MODE_INSTRUCTIONS = {
    "direct": (
        "Translate the whole C function below into a complete assembly function body. "
        "Emit the prologue (pushq %rbp; movq %rsp, %rbp; stack allocation), the code, "
        "and the epilogue. Do not emit section or .globl directives."),
    "workflow": (
        "Translate the whole C function below. Use the symbol table exactly: every local "
        "lives at the listed offset from %rbp and every global is addressed as label(%rip). "
        "Emit the prologue and the epilogue yourself."),
    "lego-part": (
        "Translate only the C fragment below; it is one part of a larger function. "
        "Do not emit a prologue or an epilogue: the frame already exists. "
        "Use the symbol table exactly. A `return` sets the return register and jumps to "
        "the epilogue label given in the context. Labels listed as preceding may be "
        "jumped to but must not be redefined."),
}

ONE_SHOT = {
    "direct": (
        "int add3(int a) { return a + 3; }",
        "add3:\n    pushq %rbp\n    movq %rsp, %rbp\n    subq $16, %rsp\n"
        "    movl %edi, -4(%rbp)\n    movl -4(%rbp), %eax\n    addl $3, %eax\n"
        "    leave\n    ret"),
    "workflow": (
        "int g;\nint bump(int a) { g = a + 1; return g; }\n"
        "# frame bump 16\n# param a rdi\na -4 4 4\n# globals\ng g(%rip) 4 4",
        "    pushq %rbp\n    movq %rsp, %rbp\n    subq $16, %rsp\n"
        "    movl %edi, -4(%rbp)\n    movl -4(%rbp), %eax\n    addl $1, %eax\n"
        "    movl %eax, g(%rip)\n    movl g(%rip), %eax\n    leave\n    ret"),
    "lego-part": (
        "a = b + 3;\nb = a - 1;\n# symbols\na -4 4 4\nb -8 4 4",
        "    movl -8(%rbp), %eax\n    addl $3, %eax\n    movl %eax, -4(%rbp)\n"
        "    movl -4(%rbp), %eax\n    subl $1, %eax\n    movl %eax, -8(%rbp)"),
}

KNOWLEDGE_NUMERICAL = (
    "Floating point: there are no floating-point immediates. Put every constant in "
    ".section .rodata under a local label (for example .LC0: .quad 0x3ff8000000000000) "
    "and load it rip-relative (movsd .LC0(%rip), %xmm0). Doubles travel in %xmm registers, "
    "use cvtsi2sdq/cvttsd2siq for conversions and ucomisd for comparisons (mind the parity "
    "flag for unordered results).")

KNOWLEDGE_COMMON = (
    "- `cmp' instructions cannot compare two immediate values: load one operand into a "
    "register first.\n"
    "- Globals are addressed rip-relative: movl g(%rip), %eax. Never use an absolute "
    "address or a bare label as a memory operand.\n"
    "- An immediate must fit the operand width: movw takes at most 16 bits, movl 32; "
    "use movabsq for wider 64-bit constants.")

KNOWLEDGE_LONG = ("The input is long. Keep the translation literal and complete: do not "
                  "summarise or skip statements.")

KNOWLEDGE_ORDER = ("Evaluate expressions exactly in the order written; calls keep their "
                   "left-to-right order and temporaries are stored to their stack slots.")


def _context_block(req: TranslationRequest) -> str:
    ctx = req.part_context
    if ctx is None:
        return ""
    lines = [f"part id: {ctx.part_id}", f"loop depth: {ctx.loop_depth}",
             f"role: {ctx.role}"]
    if ctx.preceding_labels:
        lines.append("preceding labels: " + ", ".join(ctx.preceding_labels))
    if ctx.break_label:
        lines.append(f"break jumps to: {ctx.break_label}")
    if ctx.continue_label:
        lines.append(f"continue jumps to: {ctx.continue_label}")
    fn = getattr(req.function, "name", None) or (req.symbol_table.function if req.symbol_table else "")
    if fn:
        lines.append(f"epilogue label: .L_{fn}__epilogue")
    return "\n".join(lines)


def build_prompt(req: TranslationRequest) -> str:
    sections = [SYSTEM, "## Task", MODE_INSTRUCTIONS[req.mode]]
    src, asm = ONE_SHOT[req.mode]
    sections += ["## Example", "C:", "```c", src, "```", "Assembly:", "```asm", asm, "```"]
    if req.symbol_table is not None:
        sections += ["## Symbol table", "```", req.symbol_table.dump().rstrip(), "```"]
    ctx = _context_block(req)
    if ctx:
        sections += ["## Context", ctx]
    knowledge = [KNOWLEDGE_COMMON]
    if req.flags.numerical:
        knowledge.append(KNOWLEDGE_NUMERICAL)
    if req.flags.long:
        knowledge.append(KNOWLEDGE_LONG)
    if req.flags.order:
        knowledge.append(KNOWLEDGE_ORDER)
    sections += ["## Knowledge", "\n".join(knowledge)]
    sections += ["## Source", "```c", req.source.rstrip(), "```"]
    if req.feedback is not None:
        sections += ["## Feedback from the previous attempt", req.feedback.render()]
    return "\n".join(sections) + "\n"
