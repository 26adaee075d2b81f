//! Two-sided counter machines: left states only test-and-decrement or nop to
//! the right, right states only increment or nop back to the left.
//!
//! ```text
//! counters: 1
//! left q0 q1 qf
//! right p0 p1
//! init q0
//! final qf
//! q0: goto p0
//! p0: inc c goto q1
//! q1: if c=0 goto p1 else dec goto p0
//! p1: goto qf
//! ```

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StateId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct State {
    pub name: String,
    pub side: Side,
}

/// Counter indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Instruction {
    Branch { counter: u8, on_zero: StateId, on_pos: StateId },
    LeftNop { target: StateId },
    Inc { counter: u8, target: StateId },
    RightNop { target: StateId },
}

impl Instruction {
    pub fn targets(&self) -> Vec<StateId> {
        match *self {
            Instruction::Branch { on_zero, on_pos, .. } => vec![on_zero, on_pos],
            Instruction::LeftNop { target } | Instruction::Inc { target, .. } | Instruction::RightNop { target } => {
                vec![target]
            }
        }
    }

    /// The side an instruction of this form must be attached to.
    pub fn source_side(&self) -> Side {
        match self {
            Instruction::Branch { .. } | Instruction::LeftNop { .. } => Side::Left,
            Instruction::Inc { .. } | Instruction::RightNop { .. } => Side::Right,
        }
    }

    pub fn counter(&self) -> Option<u8> {
        match *self {
            Instruction::Branch { counter, .. } | Instruction::Inc { counter, .. } => Some(counter),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoSidedMachine {
    counters: u8,
    states: Vec<State>,
    by_name: HashMap<String, StateId>,
    instructions: Vec<Option<Instruction>>,
    init: StateId,
    fin: StateId,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MachineError {
    #[error("line {line}: syntax error: {msg}")]
    SyntaxError { line: usize, msg: String },
    #[error("line {line}: unknown state {name:?}")]
    UnknownState { line: usize, name: String },
    #[error("line {line}: duplicate {what} for {name:?}")]
    DuplicateInstruction { line: usize, name: String, what: String },
    #[error("line {line}: {msg}")]
    SideViolation { line: usize, msg: String },
    #[error("state {0:?} is final and has no step")]
    FinalStateHasNoStep(String),
    #[error("state {0:?} has no instruction")]
    MissingInstruction(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Violation(pub String);

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MachineConfig {
    pub state: StateId,
    pub counters: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub halted: bool,
    pub steps_to_halt: Option<u64>,
    /// Configurations after each step; the initial configuration is not included.
    pub trace: Vec<MachineConfig>,
    /// `(first, period)`: the configuration after step `first` recurs every `period` steps.
    pub cycle: Option<(u64, u64)>,
}

impl TwoSidedMachine {
    /// Assembles a machine from parts. Shape checks happen in [`validate`].
    pub fn from_parts(
        counters: u8,
        states: Vec<State>,
        instructions: Vec<Option<Instruction>>,
        init: StateId,
        fin: StateId,
    ) -> Self {
        let by_name = states.iter().enumerate().map(|(i, s)| (s.name.clone(), StateId(i))).collect();
        TwoSidedMachine { counters, states, by_name, instructions, init, fin }
    }

    pub fn counters(&self) -> u8 {
        self.counters
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn state(&self, s: StateId) -> &State {
        &self.states[s.0]
    }

    pub fn name(&self, s: StateId) -> &str {
        &self.states[s.0].name
    }

    pub fn lookup(&self, name: &str) -> Option<StateId> {
        self.by_name.get(name).copied()
    }

    pub fn instruction(&self, s: StateId) -> Option<&Instruction> {
        self.instructions[s.0].as_ref()
    }

    pub fn init(&self) -> StateId {
        self.init
    }

    pub fn fin(&self) -> StateId {
        self.fin
    }

    pub fn state_ids(&self) -> impl Iterator<Item = StateId> {
        (0..self.states.len()).map(StateId)
    }

    pub fn initial_config(&self) -> MachineConfig {
        MachineConfig { state: self.init, counters: vec![0; self.counters as usize] }
    }

    /// Whether `qf` is reachable from `q0` in the state graph, ignoring counters.
    pub fn final_reachable(&self) -> bool {
        let mut seen = vec![false; self.states.len()];
        let mut stack = vec![self.init];
        while let Some(s) = stack.pop() {
            if std::mem::replace(&mut seen[s.0], true) {
                continue;
            }
            if s == self.fin {
                return true;
            }
            if let Some(i) = self.instruction(s) {
                stack.extend(i.targets());
            }
        }
        false
    }
}

/// Lists every well-formedness violation; an empty list means the machine is valid.
pub fn validate(m: &TwoSidedMachine) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut v = |s: String| out.push(Violation(s));
    if !(1..=2).contains(&m.counters) {
        v(format!("counter count must be 1 or 2, got {}", m.counters));
    }
    if m.state(m.init).side != Side::Left {
        v(format!("initial state {} must be a left state", m.name(m.init)));
    }
    if m.state(m.fin).side != Side::Left {
        v(format!("final state {} must be a left state", m.name(m.fin)));
    }
    if m.init == m.fin {
        v(format!("initial and final state coincide ({})", m.name(m.init)));
    }
    for s in m.state_ids() {
        let st = m.state(s);
        match m.instruction(s) {
            None if s != m.fin => v(format!("state {} has no instruction", st.name)),
            None => {}
            Some(_) if s == m.fin => v(format!("final state {} must not have an instruction", st.name)),
            Some(i) => {
                if i.source_side() != st.side {
                    v(format!("state {}: this instruction form belongs to a {} state", st.name, i.source_side()));
                }
                for t in i.targets() {
                    if m.state(t).side == st.side {
                        v(format!(
                            "state {}: target {} must be a {} state",
                            st.name,
                            m.name(t),
                            st.side.other()
                        ));
                    }
                }
                if let Some(c) = i.counter() {
                    if c == 0 || c > m.counters {
                        v(format!("state {}: counter c{} does not exist", st.name, c));
                    }
                }
            }
        }
    }
    out
}

/// The unique successor configuration.
pub fn step(m: &TwoSidedMachine, cfg: &MachineConfig) -> Result<MachineConfig, MachineError> {
    if cfg.state == m.fin {
        return Err(MachineError::FinalStateHasNoStep(m.name(cfg.state).to_string()));
    }
    let instr = m.instruction(cfg.state).ok_or_else(|| MachineError::MissingInstruction(m.name(cfg.state).into()))?;
    let mut counters = cfg.counters.clone();
    let state = match *instr {
        Instruction::Branch { counter, on_zero, on_pos } => {
            let c = &mut counters[counter as usize - 1];
            if *c == 0 {
                on_zero
            } else {
                *c -= 1;
                on_pos
            }
        }
        Instruction::Inc { counter, target } => {
            counters[counter as usize - 1] += 1;
            target
        }
        Instruction::LeftNop { target } | Instruction::RightNop { target } => target,
    };
    Ok(MachineConfig { state, counters })
}

/// Runs from `(q0, 0)` for at most `max_steps` steps.
pub fn run(m: &TwoSidedMachine, max_steps: u64) -> Result<RunResult, MachineError> {
    let mut cfg = m.initial_config();
    let mut seen: HashMap<MachineConfig, u64> = HashMap::new();
    seen.insert(cfg.clone(), 0);
    let mut res = RunResult { halted: false, steps_to_halt: None, trace: Vec::new(), cycle: None };
    for n in 1..=max_steps {
        cfg = step(m, &cfg)?;
        res.trace.push(cfg.clone());
        if cfg.state == m.fin {
            res.halted = true;
            res.steps_to_halt = Some(n);
            break;
        }
        if res.cycle.is_none() {
            if let Some(first) = seen.insert(cfg.clone(), n) {
                res.cycle = Some((first, n - first));
                seen.clear();
            }
        }
    }
    Ok(res)
}

/// Parses the machine DSL.
pub fn parse_machine(text: &str) -> Result<TwoSidedMachine, MachineError> {
    let syntax = |line: usize, msg: &str| MachineError::SyntaxError { line, msg: msg.to_string() };
    let mut counters: Option<u8> = None;
    let mut states: Vec<State> = Vec::new();
    let mut by_name: HashMap<String, StateId> = HashMap::new();
    let mut init: Option<(usize, String)> = None;
    let mut fin: Option<(usize, String)> = None;
    let mut instr_lines: Vec<(usize, String, String)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap().trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix("counters:") {
            if counters.is_some() {
                return Err(MachineError::DuplicateInstruction { line, name: "counters".into(), what: "header".into() });
            }
            let n: u8 = rest.trim().parse().map_err(|_| syntax(line, "counters must be 1 or 2"))?;
            if !(1..=2).contains(&n) {
                return Err(syntax(line, "counters must be 1 or 2"));
            }
            counters = Some(n);
            continue;
        }
        let mut words = body.split_whitespace();
        let head = words.next().unwrap();
        match head {
            "left" | "right" => {
                let side = if head == "left" { Side::Left } else { Side::Right };
                for w in words {
                    if !is_ident(w) {
                        return Err(syntax(line, &format!("bad state name {w:?}")));
                    }
                    if by_name.contains_key(w) {
                        return Err(MachineError::DuplicateInstruction { line, name: w.into(), what: "state declaration".into() });
                    }
                    by_name.insert(w.to_string(), StateId(states.len()));
                    states.push(State { name: w.to_string(), side });
                }
            }
            "init" | "final" => {
                let name = words.next().ok_or_else(|| syntax(line, "expected a state name"))?;
                if words.next().is_some() {
                    return Err(syntax(line, "expected a single state name"));
                }
                let slot = if head == "init" { &mut init } else { &mut fin };
                if slot.is_some() {
                    return Err(MachineError::DuplicateInstruction { line, name: head.into(), what: "header".into() });
                }
                *slot = Some((line, name.to_string()));
            }
            _ => {
                let (name, rhs) = body.split_once(':').ok_or_else(|| syntax(line, "expected `state: instruction`"))?;
                instr_lines.push((line, name.trim().to_string(), rhs.trim().to_string()));
            }
        }
    }

    let counters = counters.ok_or_else(|| syntax(1, "missing `counters:` header"))?;
    let resolve = |line: usize, name: &str| {
        by_name.get(name).copied().ok_or_else(|| MachineError::UnknownState { line, name: name.to_string() })
    };
    let (iline, iname) = init.ok_or_else(|| syntax(1, "missing `init` line"))?;
    let (fline, fname) = fin.ok_or_else(|| syntax(1, "missing `final` line"))?;
    let init = resolve(iline, &iname)?;
    let fin = resolve(fline, &fname)?;

    let mut instructions: Vec<Option<Instruction>> = vec![None; states.len()];
    for (line, name, rhs) in instr_lines {
        let s = resolve(line, &name)?;
        if instructions[s.0].is_some() {
            return Err(MachineError::DuplicateInstruction { line, name, what: "instruction".into() });
        }
        let mut instr = parse_instruction(line, &rhs, counters, &resolve)?;
        let side = states[s.0].side;
        if let (Instruction::LeftNop { target }, Side::Right) = (instr, side) {
            instr = Instruction::RightNop { target };
        }
        if instr.source_side() != side {
            let msg = match instr {
                Instruction::Branch { .. } => format!("decrement is only allowed in left-to-right instructions ({name} is a right state)"),
                Instruction::Inc { .. } => format!("increment is only allowed in right-to-left instructions ({name} is a left state)"),
                _ => unreachable!("nops take the side of their source"),
            };
            return Err(MachineError::SideViolation { line, msg });
        }
        instructions[s.0] = Some(instr);
    }
    Ok(TwoSidedMachine::from_parts(counters, states, instructions, init, fin))
}

fn is_ident(w: &str) -> bool {
    let mut cs = w.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

fn parse_counter(line: usize, w: &str, counters: u8) -> Result<u8, MachineError> {
    let j = match w {
        "c" if counters == 1 => 1,
        "c" => return Err(MachineError::SyntaxError { line, msg: "counter index required with two counters".into() }),
        "c1" => 1,
        "c2" => 2,
        _ => return Err(MachineError::SyntaxError { line, msg: format!("unknown counter {w:?}") }),
    };
    if j > counters {
        return Err(MachineError::SyntaxError { line, msg: format!("counter {w} exceeds `counters: {counters}`") });
    }
    Ok(j)
}

fn parse_instruction(
    line: usize,
    rhs: &str,
    counters: u8,
    resolve: &dyn Fn(usize, &str) -> Result<StateId, MachineError>,
) -> Result<Instruction, MachineError> {
    let syntax = |msg: &str| MachineError::SyntaxError { line, msg: msg.to_string() };
    let w: Vec<&str> = rhs.split_whitespace().collect();
    match w.as_slice() {
        // the caller turns this into a RightNop for right states
        ["goto", t] => Ok(Instruction::LeftNop { target: resolve(line, t)? }),
        ["inc", c, "goto", t] => Ok(Instruction::Inc { counter: parse_counter(line, c, counters)?, target: resolve(line, t)? }),
        ["dec", c, "goto", _] => {
            parse_counter(line, c, counters)?;
            Err(MachineError::SideViolation {
                line,
                msg: "a bare decrement is not an instruction; decrements happen only in the else branch of a left-to-right zero test".into(),
            })
        }
        ["if", test, "goto", z, "else", "dec", "goto", p] => {
            let c = test.strip_suffix("=0").ok_or_else(|| syntax("expected `cJ=0`"))?;
            Ok(Instruction::Branch {
                counter: parse_counter(line, c, counters)?,
                on_zero: resolve(line, z)?,
                on_pos: resolve(line, p)?,
            })
        }
        _ => Err(syntax(&format!("unrecognized instruction {rhs:?}"))),
    }
}

/// Prints the DSL; `parse_machine(print_machine(m)) == m`.
pub fn print_machine(m: &TwoSidedMachine) -> String {
    let mut out = format!("counters: {}\n", m.counters);
    for side in [Side::Left, Side::Right] {
        let names: Vec<&str> = m.states.iter().filter(|s| s.side == side).map(|s| s.name.as_str()).collect();
        out.push_str(&format!("{side} {}\n", names.join(" ")));
    }
    out.push_str(&format!("init {}\nfinal {}\n", m.name(m.init), m.name(m.fin)));
    let cname = |j: u8| if m.counters == 1 { "c".to_string() } else { format!("c{j}") };
    for s in m.state_ids() {
        let Some(i) = m.instruction(s) else { continue };
        let rhs = match *i {
            Instruction::Branch { counter, on_zero, on_pos } => {
                format!("if {}=0 goto {} else dec goto {}", cname(counter), m.name(on_zero), m.name(on_pos))
            }
            Instruction::LeftNop { target } | Instruction::RightNop { target } => format!("goto {}", m.name(target)),
            Instruction::Inc { counter, target } => format!("inc {} goto {}", cname(counter), m.name(target)),
        };
        out.push_str(&format!("{}: {}\n", m.name(s), rhs));
    }
    out
}

impl fmt::Display for TwoSidedMachine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_machine(self))
    }
}
