from argparse import ArgumentParser, Namespace

from ..ca_engine import Boundary, Grid, Neighborhood, parse_rule, run
from ..circuit import analytic_window_intervals, blinker_demo, sinusoid_sweep, sweep_mismatches
from ..configuration import RunConfig, RunMode, plan_to_config_text
from ..lattice import build_lattice_config, equivalence_report, sample, settling_report, simulate
from ..patterns import Pattern, PatternFormat, load_pattern_file, read_pattern, render_ascii, render_rle
from ..rule_synth import Infeasible, endpoint_margin, plan_to_volts, synthesize, verify
from ..trace_export import write_states_csv, write_sweep_csv, write_trace_csv
from . import CommandCLI, CommandInformation, CommandRegistry, ExitStatus, report_line


SETTLING_TOLERANCE = 0.01


def add_grid_arguments(parser: ArgumentParser):
    parser.add_argument("--pattern", help="Pattern file (.rle or .cells) holding the initial grid.")
    parser.add_argument("--inline", help="Pattern text given directly instead of a file.")
    parser.add_argument("--format", dest="pattern_format", choices=[f.value for f in PatternFormat], help="Pattern format, when it cannot be inferred.")
    parser.add_argument("--width", type=int, help="Lattice width. Defaults to the pattern width plus its offset.")
    parser.add_argument("--height", type=int, help="Lattice height. Defaults to the pattern height plus its offset.")
    parser.add_argument("--offset", metavar="ROW,COL", help="Where the pattern's top-left corner goes on the lattice.")


def add_lattice_arguments(parser: ArgumentParser):
    parser.add_argument("--rule", help="Rule in B/S notation (e.g. B3/S23). Defaults to the pattern's rule, then $CLI_DEFAULT_RULE.")
    parser.add_argument("--boundary", choices=[b.value for b in Boundary])
    parser.add_argument("--neighborhood", choices=[n.value for n in Neighborhood])


def grid_values(args: Namespace) -> dict:
    return {
        "pattern": args.pattern,
        "inline": args.inline,
        "pattern_format": args.pattern_format,
        "width": args.width,
        "height": args.height,
        "offset": args.offset,
        "rule": args.rule,
        "boundary": args.boundary,
        "neighborhood": args.neighborhood,
    }


def load_pattern(config: RunConfig) -> Pattern:
    if config.pattern is not None:
        return load_pattern_file(config.pattern, config.pattern_format)
    return read_pattern(config.inline, config.pattern_format)


def initial_grid(config: RunConfig, pattern: Pattern) -> Grid:
    return pattern.place(config.width, config.height, config.offset, config.boundary)


class RunCommand(CommandCLI):
    """
    Run the discrete automaton and render the resulting grid.

    With --out, every generation is written as a CSV table (step, cell_r_c...).
    """

    mode = RunMode.DISCRETE

    def add_arguments(self, parser: ArgumentParser):
        add_grid_arguments(parser)
        add_lattice_arguments(parser)
        parser.add_argument("--steps", type=int, help="Number of generations to compute.")
        parser.add_argument("--emit", choices=["ascii", "rle"], help="How grids are rendered (default: ascii).")
        parser.add_argument("--all", action="store_true", help="Render every generation, not only the last.")
        parser.add_argument("--out", help="CSV file to write the states of every generation to.")

    def config_values(self, args: Namespace) -> dict:
        return {**grid_values(args), "steps": args.steps, "emit": args.emit, "out": args.out}

    def execute(self, config: RunConfig, args: Namespace) -> ExitStatus:
        pattern = load_pattern(config)
        rule = config.rule_for(pattern.rule)
        grids = run(initial_grid(config, pattern), rule, config.steps, config.neighborhood)

        def render(grid: Grid) -> str:
            return render_rle(grid, rule) if config.emit == "rle" else render_ascii(grid)

        shown = list(enumerate(grids)) if args.all else [(len(grids) - 1, grids[-1])]
        for n, grid in shown:
            if args.all:
                self.echo(f"Generation {n}:")
            self.echo(render(grid))
            if args.all and n != len(grids) - 1:
                self.echo("")

        if config.out is not None:
            write_states_csv(grids, config.out)
        return ExitStatus.OK


class SimulateCommand(CommandCLI):
    """
    Simulate the continuous-time lattice and compare it with the discrete automaton.

    The lattice is sampled once per delay window; the command fails when a
    sampled grid differs from the automaton or a cell has not settled.
    """

    mode = RunMode.CONTINUOUS

    def add_arguments(self, parser: ArgumentParser):
        add_grid_arguments(parser)
        add_lattice_arguments(parser)
        parser.add_argument("--steps", type=int, help="Number of steps to sample and compare.")
        parser.add_argument("--t-end", dest="t_end", type=float, help="Simulated time, in seconds.")
        parser.add_argument("--preset", choices=["circuit", "mfc", "circuit_1ms", "mfc_4min", "custom"], help="Cell timing (default: $CLI_DEFAULT_PRESET).")
        parser.add_argument("--volt-window", dest="volt_window", metavar="LO,HI", help="Volt window the first band is calibrated onto.")
        parser.add_argument("--temperature", type=float, help="Width, in volts, of soft band edges (0 for hard edges).")
        parser.add_argument("--out", help="CSV file to write the trace to.")

    def config_values(self, args: Namespace) -> dict:
        return {
            **grid_values(args),
            "steps": args.steps,
            "t_end": args.t_end,
            "preset": args.preset,
            "volt_window": args.volt_window,
            "temperature": args.temperature,
            "out": args.out,
        }

    def execute(self, config: RunConfig, args: Namespace) -> ExitStatus:
        pattern = load_pattern(config)
        rule = config.rule_for(pattern.rule)
        initial = initial_grid(config, pattern)
        n_steps, t_end = config.continuous_span()

        lattice = build_lattice_config(
            rule,
            initial.width,
            initial.height,
            config.boundary,
            dynamics=config.cell_dynamics,
            volt_window=config.volt_window,
            neighborhood=config.neighborhood,
            temperature=config.temperature,
            plan=config.plan,
        )
        trace = simulate(lattice, initial, t_end)
        sampled = sample(trace, lattice, n_steps)
        report = equivalence_report(sampled, run(initial, rule, n_steps, config.neighborhood))
        settling = settling_report(trace, lattice, n_steps)

        if config.out is not None:
            write_trace_csv(trace, config.out)

        dyn = lattice.dynamics
        if report.equal:
            equivalence = f"equal over {report.steps_compared} samples"
        else:
            step, cells = report.first_divergence
            equivalence = f"DIVERGES at step {step}, cells {cells}"

        self.echo(
            report_line("rule", f"{rule.notation} ({lattice.plan.describe()})"),
            report_line("lattice", f"{lattice.width}x{lattice.height}, {lattice.boundary}, {lattice.neighborhood}"),
            report_line("dynamics", f"delay {dyn.delay_d:g} s, tau {dyn.tau:g} s, dt {dyn.dt:g} s"),
            report_line("simulated", f"{trace.t_end:g} s ({len(trace.times)} samples)"),
            report_line("equivalence", equivalence),
            report_line("settling", f"max deviation {settling.max_deviation:.3g}"),
        )

        if report.equal and settling.within(SETTLING_TOLERANCE):
            return ExitStatus.OK
        return ExitStatus.FAILED


class SynthCommand(CommandCLI):
    """
    Synthesize the band plan realizing a rule and verify it on every (self, outer) pair.

    With --out, the plan is written as a config file usable with `simulate --config`.
    """

    mode = RunMode.SYNTH

    def add_arguments(self, parser: ArgumentParser):
        parser.add_argument("rule", nargs="?", help="Rule in B/S notation (default: $CLI_DEFAULT_RULE).")
        parser.add_argument("--neighborhood", choices=[n.value for n in Neighborhood])
        parser.add_argument("--volt-window", dest="volt_window", metavar="LO,HI", help="Volt window the first band is calibrated onto.")
        parser.add_argument("--out", help="Config file to write the plan to.")

    def config_values(self, args: Namespace) -> dict:
        rule = parse_rule(args.rule) if args.rule is not None else None
        return {"rule": rule, "neighborhood": args.neighborhood, "volt_window": args.volt_window, "out": args.out}

    def execute(self, config: RunConfig, args: Namespace) -> ExitStatus:
        rule = config.rule
        plan = synthesize(rule, config.neighborhood)

        self.echo(report_line("rule", rule.notation))
        if isinstance(plan, Infeasible):
            self.echo(report_line("plan", f"infeasible: {plan.reason}"))
            return ExitStatus.FAILED

        verification = verify(plan, rule)
        status = "ok" if verification.ok else f"FAILED on {verification.mismatches}"
        self.echo(
            report_line("plan", plan.describe()),
            report_line("verify", f"{status} ({len(verification.mismatches)}/{verification.checked} mismatches)"),
            report_line("endpoint margin", f"{endpoint_margin(plan):g}"),
        )

        if plan.cost > 0:
            band_params, cal = plan_to_volts(plan, config.volt_window)
            volts = ", ".join(f"({b.v_thr_low:.6g}, {b.v_thr_high:.6g})" for b in band_params)
            self.echo(
                report_line("calibration", f"a = {cal.gain_a:.6g}, b = {cal.offset_b:.6g}"),
                report_line("volt bands", volts),
            )

        if config.out is not None:
            config.out.write_text(plan_to_config_text(plan, rule))
            self._logger.info("Wrote the plan to '%s'.", config.out)

        return ExitStatus.OK if verification.ok else ExitStatus.FAILED


class SweepCommand(CommandCLI):
    """
    Drive one circuit cell with a sinusoid and emit (time_s, v_in, v_out) as CSV.

    The output is checked against the closed-form window crossings, to within
    one sample. Without --out, the table goes to stdout.
    """

    mode = RunMode.SWEEP

    def add_arguments(self, parser: ArgumentParser):
        parser.add_argument("--amplitude", type=float, help="Sinusoid amplitude, in volts (default: 5).")
        parser.add_argument("--offset", type=float, help="Sinusoid offset, in volts (default: 5).")
        parser.add_argument("--freq", type=float, help="Sinusoid frequency, in hertz (default: 1000).")
        parser.add_argument("--t-end", dest="t_end", type=float, help="Sweep duration, in seconds (default: 1e-3).")
        parser.add_argument("--dt", type=float, help="Sampling step, in seconds (default: 1e-6).")
        parser.add_argument("--out", help="CSV file to write the sweep to.")

    def config_values(self, args: Namespace) -> dict:
        return {"out": args.out}

    def execute(self, config: RunConfig, args: Namespace) -> ExitStatus:
        overrides = {k: getattr(args, k) for k in ("amplitude", "offset", "freq", "t_end", "dt") if getattr(args, k) is not None}
        settings = config.sweep.model_validate({**config.sweep.model_dump(), **overrides})
        p = config.circuit

        trace = sinusoid_sweep(settings.amplitude, settings.offset, settings.freq, settings.t_end, settings.dt, p)
        intervals = analytic_window_intervals(settings.amplitude, settings.offset, settings.freq, settings.t_end, p)
        mismatches = sweep_mismatches(trace, intervals, p, settings.dt)

        if config.out is None:
            write_sweep_csv(trace, self.out)
        else:
            write_sweep_csv(trace, config.out)
            self.echo(
                report_line("samples", f"{len(trace.times)}"),
                report_line("window", f"({p.v_low:g}, {p.v_high:g}) V"),
                report_line("high intervals", ", ".join(f"({a * 1e3:.4f}, {b * 1e3:.4f}) ms" for a, b in intervals) or "none"),
                report_line("mismatches", f"{len(mismatches)}"),
            )

        if mismatches:
            self._logger.error("The sweep disagrees with the analytic crossings at %d samples (first at %g s).", len(mismatches), mismatches[0])
            return ExitStatus.FAILED
        return ExitStatus.OK


class DemoBlinkerCommand(CommandCLI):
    """
    Run the 3x3 circuit blinker and check its behavior.

    X5 (center) must stay high, X2 (north) and X4 (west) must alternate and
    never be high together, and the sampled grids must follow the automaton.
    """

    mode = RunMode.CIRCUIT

    def add_arguments(self, parser: ArgumentParser):
        parser.add_argument("--steps", type=int, help="Number of delay windows to sample (default: 10).")
        parser.add_argument("--out", help="CSV file to write the trace to.")

    def config_values(self, args: Namespace) -> dict:
        return {"steps": args.steps, "out": args.out}

    def execute(self, config: RunConfig, args: Namespace) -> ExitStatus:
        kwargs = {} if config.steps is None else {"n_steps": config.steps}
        trace, report = blinker_demo(config.circuit, **kwargs)

        if config.out is not None:
            write_trace_csv(trace, config.out)

        self.echo(*report.lines())
        return ExitStatus.OK if report.ok else ExitStatus.FAILED


SIM_COMMANDS = CommandRegistry(
    CommandInformation("run", RunCommand),
    CommandInformation("simulate", SimulateCommand),
    CommandInformation("synth", SynthCommand),
    CommandInformation("sweep", SweepCommand),
    CommandInformation("demo-blinker", DemoBlinkerCommand),
)
