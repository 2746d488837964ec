//! Lipton-style gadgets: procedural NB-CMs that count to `2^(2^i)` using only blocking
//! and non-blocking decrements, and the restore shell that resets a test-free machine's
//! counters before every fresh run.
//!
//! Sub-procedures are inlined at every call site, so the generated machines grow
//! exponentially with the number of levels. That is harmless at the sizes where
//! simulation is feasible anyway.

use std::collections::BTreeSet;

use crate::machines::{reachable_bounded, CounterId, CounterMachine, CounterOp, LocId, MachineConfig, MachineError, MachineTransition};
use crate::reductions::NameAllocator;

/// Largest supported level count; `2^(2^5)` is the last bound that fits comfortably.
pub const MAX_LEVELS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LowerBoundError {
    #[error("level {level} out of range for {levels} levels")]
    LevelOutOfRange { level: usize, levels: usize },
    #[error("level count must be between 1 and {MAX_LEVELS}, got {0}")]
    BadLevelCount(usize),
    #[error("counter `{0}` is not a barred counter of the requested level")]
    NotBarred(String),
    #[error("machine has a zero test")]
    HasZeroTest,
    #[error(transparent)]
    Machine(#[from] MachineError),
}

/// Which of the three counters of a level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Y,
    Z,
    S,
}

const ROLES: [Role; 3] = [Role::Y, Role::Z, Role::S];

/// Counter layout: for every level `i < n`, `y_i, yb_i, z_i, zb_i, s_i, sb_i` (the `b`
/// counters are the complements), followed by the simulated machine's own counters,
/// which form level `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiptonContext {
    levels: usize,
    names: Vec<String>,
    top: usize,
}

impl LiptonContext {
    pub fn new<S: AsRef<str>>(levels: usize, machine_counters: &[S]) -> Result<Self, LowerBoundError> {
        if levels == 0 || levels > MAX_LEVELS {
            return Err(LowerBoundError::BadLevelCount(levels));
        }
        let mut alloc = NameAllocator::new(machine_counters.iter().map(|s| s.as_ref().to_string()));
        let mut names = Vec::new();
        for i in 0..levels {
            for base in ["y", "yb", "z", "zb", "s", "sb"] {
                names.push(alloc.fresh(&format!("{base}_{i}")));
            }
        }
        let top = names.len();
        names.extend(machine_counters.iter().map(|s| s.as_ref().to_string()));
        Ok(LiptonContext { levels, names, top })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// All counters, in layout order.
    pub fn counters(&self) -> &[String] {
        &self.names
    }

    pub fn num_counters(&self) -> usize {
        self.names.len()
    }

    /// `2^(2^i)`.
    pub fn bound(i: usize) -> u64 {
        1u64 << (1u32 << i)
    }

    pub fn counter(&self, i: usize, role: Role, barred: bool) -> CounterId {
        assert!(i < self.levels, "level {i} has no gadget counters");
        let r = match role {
            Role::Y => 0,
            Role::Z => 1,
            Role::S => 2,
        };
        6 * i + 2 * r + usize::from(barred)
    }

    /// `Y_i` (for `i = n`, the machine's counters).
    pub fn plain(&self, i: usize) -> Vec<CounterId> {
        if i == self.levels {
            (self.top..self.names.len()).collect()
        } else {
            ROLES.iter().map(|&r| self.counter(i, r, false)).collect()
        }
    }

    /// `Ȳ_i` (empty for `i = n`).
    pub fn barred(&self, i: usize) -> Vec<CounterId> {
        if i == self.levels {
            Vec::new()
        } else {
            ROLES.iter().map(|&r| self.counter(i, r, true)).collect()
        }
    }

    /// `Y_i ∪ Ȳ_i` in the order `y, yb, z, zb, s, sb`.
    pub fn family(&self, i: usize) -> Vec<CounterId> {
        if i == self.levels {
            self.plain(i)
        } else {
            (6 * i..6 * i + 6).collect()
        }
    }

    pub fn level_of(&self, c: CounterId) -> usize {
        if c >= self.top {
            self.levels
        } else {
            c / 6
        }
    }

    pub fn is_barred(&self, c: CounterId) -> bool {
        c < self.top && c % 2 == 1
    }

    /// The plain partner of a barred counter.
    pub fn partner(&self, barred: CounterId) -> CounterId {
        debug_assert!(self.is_barred(barred));
        barred - 1
    }

    /// Sets every counter of levels `< i` to its initialised value.
    pub fn initialise_below(&self, vals: &mut [u64], i: usize) {
        for j in 0..i {
            for c in self.plain(j) {
                vals[c] = 0;
            }
            for c in self.barred(j) {
                vals[c] = Self::bound(j);
            }
        }
    }

    /// Every counter of level `j` is at most `2^(2^j)`, for every `j`.
    pub fn is_bounded(&self, vals: &[u64]) -> bool {
        vals.iter().enumerate().all(|(c, &v)| v <= Self::bound(self.level_of(c)))
    }

    fn check_level(&self, i: usize, allow_top: bool) -> Result<(), LowerBoundError> {
        if i < self.levels || (allow_top && i == self.levels) {
            Ok(())
        } else {
            Err(LowerBoundError::LevelOutOfRange { level: i, levels: self.levels })
        }
    }
}

/// A counter machine with one entry (its initial location) and named output locations
/// that have no outgoing transitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProceduralMachine {
    pub machine: CounterMachine,
    pub outputs: Vec<(String, LocId)>,
}

impl ProceduralMachine {
    pub fn entry(&self) -> LocId {
        self.machine.init()
    }

    pub fn output(&self, name: &str) -> Option<LocId> {
        self.outputs.iter().find(|(n, _)| n == name).map(|&(_, l)| l)
    }

    pub fn size(&self) -> usize {
        self.machine.locations().len() + self.machine.transitions().len()
    }
}

struct Gen<'a> {
    ctx: &'a LiptonContext,
    locs: Vec<String>,
    trans: Vec<MachineTransition>,
}

impl<'a> Gen<'a> {
    fn new(ctx: &'a LiptonContext) -> Self {
        Gen { ctx, locs: Vec::new(), trans: Vec::new() }
    }

    fn fresh(&mut self, tag: &str) -> LocId {
        let id = self.locs.len();
        self.locs.push(format!("{tag}_{id}"));
        id
    }

    fn edge(&mut self, src: LocId, op: CounterOp, dst: LocId) {
        self.trans.push(MachineTransition { src, op, dst });
    }

    /// Runs `ops` from `from` through fresh locations, the last step landing on `to`.
    fn chain_to(&mut self, tag: &str, from: LocId, ops: &[CounterOp], to: LocId) {
        let mut cur = from;
        for (k, &op) in ops.iter().enumerate() {
            let next = if k + 1 == ops.len() { to } else { self.fresh(tag) };
            self.edge(cur, op, next);
            cur = next;
        }
        if ops.is_empty() {
            self.edge(from, CounterOp::Nop, to);
        }
    }

    /// Executes `body` exactly `bound(i)^2` times, starting at `head`, using level-`i`
    /// counters `y, z` as loop indices. Returns the exit location.
    fn square_loop(&mut self, tag: &str, i: usize, head: LocId, body: &[CounterOp]) -> LocId {
        let c = self.ctx;
        let (y, yb) = (c.counter(i, Role::Y, false), c.counter(i, Role::Y, true));
        let (z, zb) = (c.counter(i, Role::Z, false), c.counter(i, Role::Z, true));
        let inner = self.fresh(tag);
        self.chain_to(tag, head, &[CounterOp::Dec(yb), CounterOp::Inc(y)], inner);
        let mut ops = vec![CounterOp::Dec(zb), CounterOp::Inc(z)];
        ops.extend_from_slice(body);
        let (zin, zz, znz) = self.testswap(i, zb);
        self.chain_to(tag, inner, &ops, zin);
        self.edge(znz, CounterOp::Nop, inner);
        let (yin, yz, ynz) = self.testswap(i, yb);
        self.edge(zz, CounterOp::Nop, yin);
        self.edge(ynz, CounterOp::Nop, head);
        let exit = self.fresh(tag);
        self.edge(yz, CounterOp::Nop, exit);
        exit
    }

    /// Returns `(entry, zero exit, non-zero exit)`.
    fn testswap(&mut self, i: usize, xb: CounterId) -> (LocId, LocId, LocId) {
        let tag = format!("ts{i}");
        let x = self.ctx.partner(xb);
        let entry = self.fresh(&tag);
        let z = self.fresh(&tag);
        let nz = self.fresh(&tag);
        self.chain_to(&tag, entry, &[CounterOp::Dec(xb), CounterOp::Inc(xb)], nz);
        if i == 0 {
            let ops = [CounterOp::Dec(x), CounterOp::Dec(x), CounterOp::Inc(xb), CounterOp::Inc(xb)];
            self.chain_to(&tag, entry, &ops, z);
        } else {
            let head = self.fresh(&tag);
            self.edge(entry, CounterOp::Nop, head);
            let exit = self.square_loop(&tag, i - 1, head, &[CounterOp::Dec(x), CounterOp::Inc(xb)]);
            self.edge(exit, CounterOp::Nop, z);
        }
        (entry, z, nz)
    }

    fn inc(&mut self, i: usize) -> (LocId, LocId) {
        let tag = format!("inc{i}");
        let entry = self.fresh(&tag);
        let out = self.fresh(&tag);
        let barred = self.ctx.barred(i);
        if i == 0 {
            let ops: Vec<_> = barred.iter().flat_map(|&c| [CounterOp::Inc(c); 2]).collect();
            self.chain_to(&tag, entry, &ops, out);
        } else {
            let body: Vec<_> = barred.iter().map(|&c| CounterOp::Inc(c)).collect();
            let exit = self.square_loop(&tag, i - 1, entry, &body);
            self.edge(exit, CounterOp::Nop, out);
        }
        (entry, out)
    }

    fn rst(&mut self, i: usize) -> (LocId, LocId) {
        let tag = format!("rst{i}");
        let entry = self.fresh(&tag);
        let out = self.fresh(&tag);
        let family = self.ctx.family(i);
        if i == 0 {
            let ops: Vec<_> = family.iter().flat_map(|&c| [CounterOp::NbDec(c); 2]).collect();
            self.chain_to(&tag, entry, &ops, out);
        } else {
            let body: Vec<_> = family.iter().map(|&c| CounterOp::NbDec(c)).collect();
            let exit = self.square_loop(&tag, i - 1, entry, &body);
            self.edge(exit, CounterOp::Nop, out);
        }
        (entry, out)
    }

    fn rstinc(&mut self) -> (LocId, LocId) {
        let a = self.fresh("ra");
        let mut cur = a;
        for i in 0..self.ctx.levels {
            let (rin, rout) = self.rst(i);
            self.edge(cur, CounterOp::Nop, rin);
            let (iin, iout) = self.inc(i);
            self.edge(rout, CounterOp::Nop, iin);
            cur = iout;
        }
        let (rin, rout) = self.rst(self.ctx.levels);
        self.edge(cur, CounterOp::Nop, rin);
        let b = self.fresh("rb");
        self.edge(rout, CounterOp::Nop, b);
        (a, b)
    }

    fn finish(self, name: String, entry: LocId, outputs: Vec<(&str, LocId)>) -> ProceduralMachine {
        let machine = CounterMachine::assemble(name, self.locs, self.ctx.names.clone(), entry, self.trans, false);
        ProceduralMachine { machine, outputs: outputs.into_iter().map(|(n, l)| (n.to_string(), l)).collect() }
    }
}

/// `TestSwap_i(xb)`: exits at `z` having swapped `xb` with its partner if `xb` was zero,
/// at `nz` with nothing changed otherwise.
pub fn gen_testswap(ctx: &LiptonContext, i: usize, xb: CounterId) -> Result<ProceduralMachine, LowerBoundError> {
    ctx.check_level(i, false)?;
    if xb >= ctx.num_counters() || !ctx.is_barred(xb) || ctx.level_of(xb) != i {
        let name = ctx.counters().get(xb).cloned().unwrap_or_else(|| format!("#{xb}"));
        return Err(LowerBoundError::NotBarred(name));
    }
    let mut g = Gen::new(ctx);
    let (entry, z, nz) = g.testswap(i, xb);
    Ok(g.finish(format!("testswap{i}_{}", ctx.counters()[xb]), entry, vec![("z", z), ("nz", nz)]))
}

/// `Inc_i`: raises every counter of `Ȳ_i` from 0 to `2^(2^i)`.
pub fn gen_inc(ctx: &LiptonContext, i: usize) -> Result<ProceduralMachine, LowerBoundError> {
    ctx.check_level(i, false)?;
    let mut g = Gen::new(ctx);
    let (entry, out) = g.inc(i);
    Ok(g.finish(format!("inc{i}"), entry, vec![("out", out)]))
}

/// `Rst_i`: subtracts `2^(2^i)` (clamped at zero) from every counter of `Y_i ∪ Ȳ_i`.
pub fn gen_rst(ctx: &LiptonContext, i: usize) -> Result<ProceduralMachine, LowerBoundError> {
    ctx.check_level(i, true)?;
    let mut g = Gen::new(ctx);
    let (entry, out) = g.rst(i);
    Ok(g.finish(format!("rst{i}"), entry, vec![("out", out)]))
}

/// `Rst_0; Inc_0; Rst_1; …; Inc_{n-1}; Rst_n`.
pub fn gen_rstinc(ctx: &LiptonContext) -> ProceduralMachine {
    let mut g = Gen::new(ctx);
    let (a, b) = g.rstinc();
    g.finish("rstinc".into(), a, vec![("out", b)])
}

/// The restore machine: a fresh initial location, then `RstInc` over the gadget counters
/// and `m`'s counters, then `m` itself; every location can restore to the fresh start.
/// `m`'s location and counter names are kept; generated names are primed on a clash.
pub fn gen_shell(m: &CounterMachine, levels: usize) -> Result<(CounterMachine, LiptonContext), LowerBoundError> {
    if !m.is_test_free() {
        return Err(LowerBoundError::HasZeroTest);
    }
    let ctx = LiptonContext::new(levels, m.counters())?;
    let mut g = Gen::new(&ctx);
    let (a, b) = g.rstinc();
    let mut alloc = NameAllocator::new(m.locations().iter().cloned());
    let start = alloc.fresh("start");
    let mut locations = vec![start];
    locations.extend(g.locs.iter().map(|l| alloc.fresh(l)));
    let off = locations.len();
    locations.extend(m.locations().iter().cloned());
    let shift = |l: LocId| l + 1;
    let mut trans = vec![MachineTransition { src: 0, op: CounterOp::Nop, dst: shift(a) }];
    trans.extend(g.trans.iter().map(|t| MachineTransition { src: shift(t.src), op: t.op, dst: shift(t.dst) }));
    trans.push(MachineTransition { src: shift(b), op: CounterOp::Nop, dst: off + m.init() });
    let top = ctx.top;
    let lift = |op: CounterOp| match op {
        CounterOp::Nop => CounterOp::Nop,
        CounterOp::Inc(x) => CounterOp::Inc(top + x),
        CounterOp::Dec(x) => CounterOp::Dec(top + x),
        CounterOp::NbDec(x) => CounterOp::NbDec(top + x),
        CounterOp::ZeroTest(x) => CounterOp::ZeroTest(top + x),
    };
    trans.extend(m.transitions().iter().map(|t| MachineTransition { src: off + t.src, op: lift(t.op), dst: off + t.dst }));
    let shell = CounterMachine::assemble(m.name().to_string(), locations, ctx.names.clone(), 0, trans, true);
    Ok((shell, ctx))
}

/// Every output configuration reachable from one entry valuation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exits {
    pub reached: BTreeSet<(String, Vec<u64>)>,
    /// Every visited valuation was j-bounded for every level j.
    pub bounded: bool,
    pub visited: usize,
}

/// Explores `pm` (without restores) from its entry with valuation `entry`.
pub fn simulate(pm: &ProceduralMachine, ctx: &LiptonContext, entry: Vec<u64>, budget: usize) -> Result<Exits, LowerBoundError> {
    let start = MachineConfig { loc: pm.entry(), vals: entry };
    let explored = reachable_bounded(&pm.machine, start, u64::MAX, budget)?;
    let mut reached = BTreeSet::new();
    for c in &explored.configs {
        if let Some((name, _)) = pm.outputs.iter().find(|(_, l)| *l == c.loc) {
            reached.insert((name.clone(), c.vals.clone()));
        }
    }
    let bounded = explored.configs.iter().all(|c| ctx.is_bounded(&c.vals));
    Ok(Exits { reached, bounded, visited: explored.configs.len() })
}

/// A contract violation: the entry valuation and what went wrong.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub procedure: String,
    pub entry: Vec<u64>,
    pub problem: String,
}

/// Every valuation obtained by letting each counter of `free` range over `0..=max`.
fn valuations(base: &[u64], free: &[CounterId], max: u64) -> Vec<Vec<u64>> {
    let mut out = vec![base.to_vec()];
    for &c in free {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..=max).map(move |k| {
                    let mut w = v.clone();
                    w[c] = k;
                    w
                })
            })
            .collect();
    }
    out
}

/// Background valuations for the levels a procedure at level `i` must not touch:
/// all zero, and a fixed bounded pattern.
fn backgrounds(ctx: &LiptonContext, i: usize) -> Vec<Vec<u64>> {
    let zero = vec![0; ctx.num_counters()];
    let noise = (0..ctx.num_counters())
        .map(|c| {
            let j = ctx.level_of(c);
            if j > i { (c as u64 * 7 + 3) % (LiptonContext::bound(j) + 1) } else { 0 }
        })
        .collect();
    vec![zero, noise]
}

fn expect_single(
    pm: &ProceduralMachine,
    ctx: &LiptonContext,
    entry: &[u64],
    output: &str,
    want: &[u64],
    budget: usize,
) -> Result<(), Violation> {
    let fail = |problem: String| Violation { procedure: pm.machine.name().to_string(), entry: entry.to_vec(), problem };
    let exits = simulate(pm, ctx, entry.to_vec(), budget).map_err(|e| fail(e.to_string()))?;
    if !exits.bounded {
        return Err(fail("a visited valuation exceeds its level bound".into()));
    }
    let expected: BTreeSet<_> = [(output.to_string(), want.to_vec())].into();
    if exits.reached != expected {
        return Err(fail(format!("exits {:?}, expected {:?}", exits.reached, expected)));
    }
    Ok(())
}

/// Checks `TestSwap_i(xb)` for every barred `xb` of level `i` on every admissible entry
/// (lower levels initialised, `s_i = 0`, `sb_i = bound`, `x + xb = bound`, the remaining
/// level-`i` pair anywhere within the bound). Returns the number of entries checked.
pub fn verify_testswap(ctx: &LiptonContext, i: usize, budget: usize) -> Result<usize, Violation> {
    let k = LiptonContext::bound(i);
    let mut cases = 0;
    for xb in ctx.barred(i) {
        let pm = gen_testswap(ctx, i, xb).expect("level checked by caller");
        let x = ctx.partner(xb);
        let (s, sb) = (ctx.counter(i, Role::S, false), ctx.counter(i, Role::S, true));
        let free: Vec<_> = ctx.family(i).into_iter().filter(|&c| ![x, xb, s, sb].contains(&c)).collect();
        for bg in backgrounds(ctx, i) {
            let mut base = bg;
            ctx.initialise_below(&mut base, i);
            base[s] = 0;
            base[sb] = k;
            for mut entry in valuations(&base, &free, k) {
                for vx in 0..=k {
                    if xb == sb && vx != 0 {
                        continue;
                    }
                    entry[x] = vx;
                    entry[xb] = k - vx;
                    let mut want = entry.clone();
                    let output = if entry[xb] == 0 {
                        want[x] = 0;
                        want[xb] = vx;
                        "z"
                    } else {
                        "nz"
                    };
                    expect_single(&pm, ctx, &entry, output, &want, budget)?;
                    cases += 1;
                }
            }
        }
    }
    Ok(cases)
}

/// Checks `Inc_i` on every admissible entry (lower levels initialised, `Ȳ_i` zero, `Y_i`
/// anywhere within the bound).
pub fn verify_inc(ctx: &LiptonContext, i: usize, budget: usize) -> Result<usize, Violation> {
    let k = LiptonContext::bound(i);
    let pm = gen_inc(ctx, i).expect("level checked by caller");
    let mut cases = 0;
    for bg in backgrounds(ctx, i) {
        let mut base = bg;
        ctx.initialise_below(&mut base, i);
        for c in ctx.barred(i) {
            base[c] = 0;
        }
        for entry in valuations(&base, &ctx.plain(i), k) {
            let mut want = entry.clone();
            for c in ctx.barred(i) {
                want[c] = k;
            }
            expect_single(&pm, ctx, &entry, "out", &want, budget)?;
            cases += 1;
        }
    }
    Ok(cases)
}

/// Checks `Rst_i` on every admissible entry (lower levels initialised, `Y_i ∪ Ȳ_i`
/// anywhere within the bound): the family ends at zero and nothing else moves.
pub fn verify_rst(ctx: &LiptonContext, i: usize, budget: usize) -> Result<usize, Violation> {
    let k = LiptonContext::bound(i);
    let pm = gen_rst(ctx, i).expect("level checked by caller");
    let mut cases = 0;
    for bg in backgrounds(ctx, i) {
        let mut base = bg;
        ctx.initialise_below(&mut base, i);
        for entry in valuations(&base, &ctx.family(i), k) {
            let mut want = entry.clone();
            for c in ctx.family(i) {
                want[c] = 0;
            }
            expect_single(&pm, ctx, &entry, "out", &want, budget)?;
            cases += 1;
        }
    }
    Ok(cases)
}

/// Checks `RstInc` from every bounded entry: exits with every `Ȳ_i` at its bound and
/// everything else at zero.
pub fn verify_rstinc(ctx: &LiptonContext, budget: usize) -> Result<usize, Violation> {
    let pm = gen_rstinc(ctx);
    let mut want = vec![0; ctx.num_counters()];
    ctx.initialise_below(&mut want, ctx.levels());
    let mut entries = vec![vec![0; ctx.num_counters()]];
    for c in 0..ctx.num_counters() {
        let max = LiptonContext::bound(ctx.level_of(c));
        entries = entries
            .into_iter()
            .flat_map(|v| {
                (0..=max).map(move |k| {
                    let mut w = v.clone();
                    w[c] = k;
                    w
                })
            })
            .collect();
    }
    for entry in &entries {
        expect_single(&pm, ctx, entry, "out", &want, budget)?;
    }
    Ok(entries.len())
}
