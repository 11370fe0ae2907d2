"""Structural Verilog-2001 emitter for acyclic and cyclic APUF/ROPUF/BPUF.

The emitted RTL captures structure only (symmetric paths, rings, latches and
feedback loops). Process variation lives in silicon, so simulating this RTL
does not reproduce the behavioral simulator's responses.

Toolkit bit ``i`` (leftmost in a bit string) maps to Verilog index
``width - 1 - i``, so ``4'b1010`` in a testbench equals the string "1010".
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .bits import to_bits, to_str
from .core import PufCategory
from .cyclic import FeedbackConfig
from .errors import ConfigError, UsageError

COUNTER_WIDTH = 16


@dataclass(frozen=True)
class RtlConfig:
    category: PufCategory
    n_c: int
    n: int
    fb: Optional[FeedbackConfig] = None
    module_name: str = ""
    keep_hierarchy: bool = True

    def __post_init__(self):
        object.__setattr__(self, "category", PufCategory(self.category))
        if self.n_c < 1 or self.n < 1:
            raise ConfigError("challenge and response widths must be >= 1")
        if self.fb is not None:
            self.fb.validate(self.n_c, self.n)
        if not self.module_name:
            prefix = "cyc_" if self.cyclic else ""
            object.__setattr__(self, "module_name", f"{prefix}{self.category.value}_{self.n_c}x{self.n}")
        if not self.module_name.isidentifier():
            raise ConfigError(f"invalid Verilog module name {self.module_name!r}")

    @property
    def cyclic(self) -> bool:
        return self.fb is not None and len(self.fb) > 0


def _ch(cfg: RtlConfig, i: int) -> int:
    return cfg.n_c - 1 - i


def _rs(cfg: RtlConfig, j: int) -> int:
    return cfg.n - 1 - j


_MUX_PAIR = """\
// Symmetric switch stage: sel=0 passes straight, sel=1 crosses the two paths.
module puf_mux_pair (
    input  wire in_top,
    input  wire in_bot,
    input  wire sel,
    output wire out_top,
    output wire out_bot
);
    assign out_top = sel ? in_bot : in_top;
    assign out_bot = sel ? in_top : in_bot;
endmodule
"""

_ARBITER = """\
// Arbiter latch: samples the top path when the bottom edge arrives,
// so q = 1 iff the top signal won the race.
module puf_arbiter (
    input  wire d,
    input  wire g,
    output reg  q
);
    always @(*) begin
        if (g)
            q = d;
    end
endmodule
"""

_RO_STAGE = """\
// Ring stage: two candidate inverters, one selected by the challenge bit.
module puf_ro_stage (
    input  wire in,
    input  wire sel,
    output wire out
);
    wire inv0;
    wire inv1;
    assign inv0 = ~in;
    assign inv1 = ~in;
    assign out = sel ? inv1 : inv0;
endmodule
"""

_RO_COUNTER = f"""\
// Edge counter clocked by a ring output; cleared while enable is low.
module puf_ro_counter (
    input  wire        ring,
    input  wire        enable,
    output reg  [{COUNTER_WIDTH - 1}:0] count
);
    always @(posedge ring or negedge enable) begin
        if (!enable)
            count <= {COUNTER_WIDTH}'d0;
        else
            count <= count + {COUNTER_WIDTH}'d1;
    end
endmodule
"""

_SWAP_STAGE = """\
// Excitation routing stage: challenge-controlled swap of the two release paths.
module puf_swap_stage (
    input  wire in_a,
    input  wire in_b,
    input  wire sel,
    output wire out_a,
    output wire out_b
);
    assign out_a = sel ? in_b : in_a;
    assign out_b = sel ? in_a : in_b;
endmodule
"""

_BUTTERFLY = """\
// Butterfly cell: two cross-coupled latches, preset/cleared while excited.
// On release the loop settles to a state set by the path mismatch.
module puf_butterfly_cell (
    input  wire excite_a,
    input  wire excite_b,
    output wire out
);
    wire q_a;
    wire q_b;
    assign q_a = excite_a | q_b;
    assign q_b = ~excite_b & q_a;
    assign out = q_a;
endmodule
"""


def _keep(cfg: RtlConfig) -> str:
    return '(* dont_touch = "true" *) ' if cfg.keep_hierarchy else ""


def _header(cfg: RtlConfig) -> list:
    form = "cyclic" if cfg.cyclic else "acyclic"
    taps = len(cfg.fb) if cfg.cyclic else 0
    lines = [
        f"// {cfg.module_name}: {form} {cfg.category.short_name}, "
        f"{cfg.n_c}-bit challenge, {cfg.n}-bit response, {taps} feedback tap{'' if taps == 1 else 's'}",
        "// Generated by cyclic_puf.rtlgen; do not edit by hand.",
        "`default_nettype none",
        "",
        f"module {cfg.module_name} (",
        f"    input  wire [{cfg.n_c - 1}:0] challenge,",
        "    input  wire enable,",
    ]
    if cfg.cyclic:
        lines.append("    input  wire clk,")
    lines += [f"    output wire [{cfg.n - 1}:0] response", ");"]
    return lines


def _feedback(cfg: RtlConfig) -> list:
    """Effective-challenge network; plain wiring when there is no feedback.

    Cyclic designs evaluate the core while ``clk`` is high, hold its result in
    a latch while ``clk`` is low, and register the held response into the
    feedback path on the falling edge.
    """
    lines = [f"    wire [{cfg.n_c - 1}:0] eff_challenge;"]
    if not cfg.cyclic:
        lines += ["    assign eff_challenge = challenge;", ""]
        return lines
    lines += [
        f"    wire [{cfg.n - 1}:0] core_response;",
        "    wire launch;",
        "    assign launch = enable & clk;",
        "",
        "    // Hold the evaluated response while the core is idle.",
        f"    reg  [{cfg.n - 1}:0] hold;",
        "    always @(*) begin",
        "        if (launch)",
        "            hold = core_response;",
        "    end",
        "    assign response = hold;",
        "",
        "    // Registered feedback, cleared while enable is low.",
        f"    reg  [{cfg.n - 1}:0] fb_q;",
        "    always @(negedge clk) begin",
        "        if (!enable)",
        f"            fb_q <= {cfg.n}'d0;",
        "        else",
        "            fb_q <= response;",
        "    end",
        "",
    ]
    driven = {t.target_pos for t in cfg.fb.taps}
    for pos in range(cfg.n_c):
        if pos not in driven:
            lines.append(f"    assign eff_challenge[{_ch(cfg, pos)}] = challenge[{_ch(cfg, pos)}];")
    for k, tap in enumerate(cfg.fb.taps):
        lines.append(f"    {_keep(cfg)}xor fb_xor_{k} (eff_challenge[{_ch(cfg, tap.target_pos)}], "
                     f"challenge[{_ch(cfg, tap.ch_idx)}], fb_q[{_rs(cfg, tap.resp_idx)}]);")
    lines.append("")
    return lines


def _nets(cfg: RtlConfig) -> tuple:
    """(core start signal, core output bus) for the chosen form."""
    return ("launch", "core_response") if cfg.cyclic else ("enable", "response")


def _apuf_body(cfg: RtlConfig) -> list:
    go, out = _nets(cfg)
    lines = []
    for j in range(cfg.n):
        lines += [
            f"    // response bit {j}: {cfg.n_c}-stage arbiter chain",
            f"    wire [{cfg.n_c}:0] top_{j};",
            f"    wire [{cfg.n_c}:0] bot_{j};",
            f"    assign top_{j}[0] = {go};",
            f"    assign bot_{j}[0] = {go};",
        ]
        for k in range(cfg.n_c):
            lines.append(
                f"    {_keep(cfg)}puf_mux_pair stage_{j}_{k} (.in_top(top_{j}[{k}]), .in_bot(bot_{j}[{k}]), "
                f".sel(eff_challenge[{_ch(cfg, k)}]), .out_top(top_{j}[{k + 1}]), .out_bot(bot_{j}[{k + 1}]));")
        lines += [
            f"    {_keep(cfg)}puf_arbiter arbiter_{j} (.d(top_{j}[{cfg.n_c}]), .g(bot_{j}[{cfg.n_c}]), "
            f".q({out}[{_rs(cfg, j)}]));",
            "",
        ]
    return lines


def _ropuf_body(cfg: RtlConfig) -> list:
    # an odd number of inversions is needed for oscillation
    gate = "nand" if cfg.n_c % 2 == 0 else "and"
    go, out = _nets(cfg)
    lines = []
    for j in range(cfg.n):
        lines.append(f"    // response bit {j}: two {cfg.n_c}-stage challenge-configured rings")
        for ring in ("a", "b"):
            name = f"ring_{ring}_{j}"
            lines += [f"    wire [{cfg.n_c}:0] {name};", f"    wire [{COUNTER_WIDTH - 1}:0] count_{ring}_{j};",
                      f"    {_keep(cfg)}{gate} {name}_gate ({name}[0], {go}, {name}[{cfg.n_c}]);"]
            for k in range(cfg.n_c):
                lines.append(f"    {_keep(cfg)}puf_ro_stage {name}_s{k} (.in({name}[{k}]), "
                             f".sel(eff_challenge[{_ch(cfg, k)}]), .out({name}[{k + 1}]));")
            lines.append(f"    puf_ro_counter counter_{ring}_{j} (.ring({name}[{cfg.n_c}]), .enable({go}), "
                         f".count(count_{ring}_{j}));")
        lines += [f"    assign {out}[{_rs(cfg, j)}] = count_a_{j} > count_b_{j};", ""]
    return lines


def _bpuf_body(cfg: RtlConfig) -> list:
    go, out = _nets(cfg)
    lines = []
    for j in range(cfg.n):
        lines += [
            f"    // response bit {j}: butterfly cell behind a {cfg.n_c}-stage release network",
            f"    wire [{cfg.n_c}:0] exc_a_{j};",
            f"    wire [{cfg.n_c}:0] exc_b_{j};",
            f"    assign exc_a_{j}[0] = ~{go};",
            f"    assign exc_b_{j}[0] = ~{go};",
        ]
        for k in range(cfg.n_c):
            lines.append(
                f"    {_keep(cfg)}puf_swap_stage swap_{j}_{k} (.in_a(exc_a_{j}[{k}]), .in_b(exc_b_{j}[{k}]), "
                f".sel(eff_challenge[{_ch(cfg, k)}]), .out_a(exc_a_{j}[{k + 1}]), .out_b(exc_b_{j}[{k + 1}]));")
        lines += [
            f"    {_keep(cfg)}puf_butterfly_cell cell_{j} (.excite_a(exc_a_{j}[{cfg.n_c}]), "
            f".excite_b(exc_b_{j}[{cfg.n_c}]), .out({out}[{_rs(cfg, j)}]));",
            "",
        ]
    return lines


_BODIES = {
    PufCategory.ARBITER: (_apuf_body, (_MUX_PAIR, _ARBITER)),
    PufCategory.RING_OSCILLATOR: (_ropuf_body, (_RO_STAGE, _RO_COUNTER)),
    PufCategory.BUTTERFLY: (_bpuf_body, (_SWAP_STAGE, _BUTTERFLY)),
}


def emit_verilog(cfg: RtlConfig) -> str:
    """Deterministic Verilog text for ``cfg``: the top module followed by its cells."""
    body, cells = _BODIES[cfg.category]
    lines = _header(cfg) + [""] + _feedback(cfg) + body(cfg)
    while lines[-1] == "":
        lines.pop()
    lines.append("endmodule")
    for cell in cells:
        lines += ["", cell.rstrip("\n")]
    lines += ["", "`default_nettype wire", ""]
    return "\n".join(lines)


def emit_testbench(cfg: RtlConfig, challenges: Sequence = (), cycles: int = 8, period_ns: int = 10) -> str:
    """Testbench that holds each challenge for ``cycles`` clock cycles and prints every response."""
    chs = [to_bits(c) for c in challenges]
    for c in chs:
        if c.size != cfg.n_c:
            raise UsageError(f"testbench challenge has {c.size} bits, design expects {cfg.n_c}")
    if cycles < 1:
        raise UsageError("cycles must be >= 1")
    half = period_ns // 2 or 1
    clk_port = ", .clk(clk)" if cfg.cyclic else ""
    lines = [
        f"// Testbench for {cfg.module_name}: {len(chs)} challenge(s), {cycles} cycle(s) each.",
        "`timescale 1ns/1ps",
        "",
        f"module tb_{cfg.module_name};",
        f"    reg  [{cfg.n_c - 1}:0] challenge;",
        "    reg  enable;",
        "    reg  clk;",
        f"    wire [{cfg.n - 1}:0] response;",
        "    integer cyc;",
        "",
        f"    {cfg.module_name} dut (.challenge(challenge), .enable(enable){clk_port}, .response(response));",
        "",
        "    initial clk = 1'b0;",
        f"    always #{half} clk = ~clk;",
        "",
        "    initial begin",
        "        enable = 1'b0;",
        f"        challenge = {cfg.n_c}'d0;",
    ]
    for idx, c in enumerate(chs):
        lines += [
            f"        // challenge {idx}",
            "        enable = 1'b0;",
            f"        challenge = {cfg.n_c}'b{to_str(c)};",
            "        repeat (2) @(negedge clk);",
            "        #1;",
            "        enable = 1'b1;",
            f"        for (cyc = 1; cyc <= {cycles}; cyc = cyc + 1) begin",
            "            @(negedge clk);",
            "            #1;",
            '            $display("challenge=%b cycle=%0d response=%b", challenge, cyc, response);',
            "        end",
        ]
    lines += ["        $finish;", "    end", "endmodule", ""]
    return "\n".join(lines)
