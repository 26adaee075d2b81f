//! Standard (Minsky) counter machines and their conversion into two-sided
//! machines by inserting nop bridge states.
//!
//! The standard DSL has no side declarations; states are declared implicitly:
//!
//! ```text
//! counters: 2
//! init s0
//! final halt
//! s0: inc c1 goto s1
//! s1: if c1=0 goto halt else dec goto s0
//! ```

use std::collections::HashMap;

use crate::machine::{Instruction, MachineError, Side, State, StateId, TwoSidedMachine};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StdInstruction {
    Inc { counter: u8, target: usize },
    Branch { counter: u8, on_zero: usize, on_pos: usize },
    Goto { target: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StandardMachine {
    pub counters: u8,
    pub names: Vec<String>,
    pub instructions: Vec<Option<StdInstruction>>,
    pub init: usize,
    pub fin: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StdRun {
    pub halted: bool,
    pub steps: u64,
    /// State after each step.
    pub states: Vec<usize>,
}

impl StandardMachine {
    pub fn run(&self, max_steps: u64) -> Result<StdRun, MachineError> {
        let mut state = self.init;
        let mut counters = vec![0u64; self.counters as usize];
        let mut out = StdRun { halted: state == self.fin, steps: 0, states: Vec::new() };
        while !out.halted && out.steps < max_steps {
            let instr = self.instructions[state].ok_or_else(|| MachineError::MissingInstruction(self.names[state].clone()))?;
            state = match instr {
                StdInstruction::Inc { counter, target } => {
                    counters[counter as usize - 1] += 1;
                    target
                }
                StdInstruction::Branch { counter, on_zero, on_pos } => {
                    let c = &mut counters[counter as usize - 1];
                    if *c == 0 {
                        on_zero
                    } else {
                        *c -= 1;
                        on_pos
                    }
                }
                StdInstruction::Goto { target } => target,
            };
            out.steps += 1;
            out.states.push(state);
            out.halted = state == self.fin;
        }
        Ok(out)
    }
}

pub fn parse_standard(text: &str) -> Result<StandardMachine, MachineError> {
    let syntax = |line: usize, msg: String| MachineError::SyntaxError { line, msg };
    let mut counters = None;
    let mut names: Vec<String> = Vec::new();
    let mut ids: HashMap<String, usize> = HashMap::new();
    fn intern(names: &mut Vec<String>, ids: &mut HashMap<String, usize>, n: &str) -> usize {
        *ids.entry(n.to_string()).or_insert_with(|| {
            names.push(n.to_string());
            names.len() - 1
        })
    }
    let mut init = None;
    let mut fin = None;
    let mut lines: Vec<(usize, &str, &str)> = Vec::new();
    for (idx, l) in text.lines().enumerate() {
        let line = idx + 1;
        let body = l.split('#').next().unwrap().trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix("counters:") {
            let n: u8 = rest.trim().parse().map_err(|_| syntax(line, "counters must be 1 or 2".into()))?;
            if !(1..=2).contains(&n) {
                return Err(syntax(line, "counters must be 1 or 2".into()));
            }
            counters = Some(n);
        } else if let Some(rest) = body.strip_prefix("init ") {
            init = Some(intern(&mut names, &mut ids, rest.trim()));
        } else if let Some(rest) = body.strip_prefix("final ") {
            fin = Some(intern(&mut names, &mut ids, rest.trim()));
        } else {
            let (name, rhs) = body.split_once(':').ok_or_else(|| syntax(line, "expected `state: instruction`".into()))?;
            lines.push((line, name.trim(), rhs.trim()));
        }
    }
    let counters = counters.ok_or_else(|| syntax(1, "missing `counters:` header".into()))?;
    let init = init.ok_or_else(|| syntax(1, "missing `init` line".into()))?;
    let fin = fin.ok_or_else(|| syntax(1, "missing `final` line".into()))?;
    let counter = |line: usize, w: &str| -> Result<u8, MachineError> {
        let j = match w {
            "c" if counters == 1 => 1,
            "c1" => 1,
            "c2" => 2,
            _ => return Err(syntax(line, format!("unknown counter {w:?}"))),
        };
        if j > counters {
            return Err(syntax(line, format!("counter {w} exceeds `counters: {counters}`")));
        }
        Ok(j)
    };
    let mut parsed: Vec<(usize, usize, StdInstruction)> = Vec::new();
    for (line, name, rhs) in lines {
        let s = intern(&mut names, &mut ids, name);
        let w: Vec<&str> = rhs.split_whitespace().collect();
        let instr = match w.as_slice() {
            ["goto", t] => StdInstruction::Goto { target: intern(&mut names, &mut ids, t) },
            ["inc", c, "goto", t] => StdInstruction::Inc { counter: counter(line, c)?, target: intern(&mut names, &mut ids, t) },
            ["if", test, "goto", z, "else", "dec", "goto", p] => {
                let c = test.strip_suffix("=0").ok_or_else(|| syntax(line, "expected `cJ=0`".into()))?;
                StdInstruction::Branch {
                    counter: counter(line, c)?,
                    on_zero: intern(&mut names, &mut ids, z),
                    on_pos: intern(&mut names, &mut ids, p),
                }
            }
            _ => return Err(syntax(line, format!("unrecognized instruction {rhs:?}"))),
        };
        parsed.push((line, s, instr));
    }
    let mut instructions = vec![None; names.len()];
    for (line, s, instr) in parsed {
        if instructions[s].is_some() {
            return Err(MachineError::DuplicateInstruction { line, name: names[s].clone(), what: "instruction".into() });
        }
        instructions[s] = Some(instr);
    }
    Ok(StandardMachine { counters, names, instructions, init, fin })
}

/// Side forced by a state's instruction: increments leave right states,
/// zero tests leave left states. Nops and the final state default to left.
fn natural_side(i: Option<StdInstruction>) -> Side {
    match i {
        Some(StdInstruction::Inc { .. }) => Side::Right,
        _ => Side::Left,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conversion {
    pub machine: TwoSidedMachine,
    /// Two-sided state for each standard state (same index).
    pub state_map: Vec<StateId>,
    /// Number of inserted bridge states.
    pub bridges: usize,
}

/// Converts a standard machine into a two-sided machine. Every transition
/// whose target sits on the wrong side is routed through a nop bridge state,
/// and a right-side initial state gets a left bridge in front of it.
/// A standard run of `n` steps becomes a two-sided run of at most `2n + 1`
/// steps, or exactly 2 when the initial state is already final.
pub fn convert_minsky(m: &StandardMachine) -> Conversion {
    let n = m.names.len();
    let mut states: Vec<State> = (0..n)
        .map(|i| State { name: m.names[i].clone(), side: natural_side(m.instructions[i]) })
        .collect();
    let mut instrs: Vec<Option<Instruction>> = vec![None; n];
    let mut bridge_for: HashMap<usize, StateId> = HashMap::new();
    let taken: std::collections::HashSet<String> = m.names.iter().cloned().collect();

    // A bridge leading into `t` lives on the opposite side of `t`.
    let mut bridge = |t: usize, states: &mut Vec<State>, instrs: &mut Vec<Option<Instruction>>| -> StateId {
        *bridge_for.entry(t).or_insert_with(|| {
            let side = states[t].side.other();
            let mut name = format!("{}__via", m.names[t]);
            while taken.contains(&name) {
                name.push('_');
            }
            states.push(State { name, side });
            let target = StateId(t);
            instrs.push(Some(match side {
                Side::Left => Instruction::LeftNop { target },
                Side::Right => Instruction::RightNop { target },
            }));
            StateId(states.len() - 1)
        })
    };

    for s in 0..n {
        let Some(instr) = m.instructions[s] else { continue };
        let need = states[s].side.other();
        let mut route = |t: usize, states: &mut Vec<State>, instrs: &mut Vec<Option<Instruction>>| {
            if states[t].side == need {
                StateId(t)
            } else {
                bridge(t, states, instrs)
            }
        };
        let converted = match (instr, states[s].side) {
            (StdInstruction::Inc { counter, target }, _) => {
                Instruction::Inc { counter, target: route(target, &mut states, &mut instrs) }
            }
            (StdInstruction::Branch { counter, on_zero, on_pos }, _) => {
                let on_zero = route(on_zero, &mut states, &mut instrs);
                let on_pos = route(on_pos, &mut states, &mut instrs);
                Instruction::Branch { counter, on_zero, on_pos }
            }
            (StdInstruction::Goto { target }, Side::Left) => {
                Instruction::LeftNop { target: route(target, &mut states, &mut instrs) }
            }
            (StdInstruction::Goto { target }, Side::Right) => {
                Instruction::RightNop { target: route(target, &mut states, &mut instrs) }
            }
        };
        instrs[s] = Some(converted);
    }
    let init = if m.init == m.fin {
        // the two-sided form needs a step before the final state
        let via = bridge(m.fin, &mut states, &mut instrs);
        let mut name = format!("{}__start", m.names[m.fin]);
        while taken.contains(&name) {
            name.push('_');
        }
        states.push(State { name, side: Side::Left });
        instrs.push(Some(Instruction::LeftNop { target: via }));
        StateId(states.len() - 1)
    } else if states[m.init].side == Side::Left {
        StateId(m.init)
    } else {
        bridge(m.init, &mut states, &mut instrs)
    };
    let bridges = states.len() - n;
    let machine = TwoSidedMachine::from_parts(m.counters, states, instrs, init, StateId(m.fin));
    Conversion { machine, state_map: (0..n).map(StateId).collect(), bridges }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{run, validate};

    #[test]
    fn consecutive_increments_get_a_left_nop_between() {
        let m = parse_standard("counters: 1\ninit a\nfinal h\na: inc c goto b\nb: inc c goto h\n").unwrap();
        let conv = convert_minsky(&m);
        assert!(validate(&conv.machine).is_empty(), "{:?}", validate(&conv.machine));
        let tm = &conv.machine;
        let b = tm.lookup("b").unwrap();
        let Some(Instruction::Inc { target, .. }) = tm.instruction(tm.lookup("a").unwrap()) else { panic!() };
        assert_eq!(tm.instruction(*target), Some(&Instruction::LeftNop { target: b }));
    }

    #[test]
    fn single_instruction_adds_at_most_two_states() {
        let m = parse_standard("counters: 1\ninit a\nfinal h\na: inc c goto h\n").unwrap();
        let conv = convert_minsky(&m);
        assert!(conv.bridges <= 2);
        assert!(validate(&conv.machine).is_empty());
        assert!(run(&conv.machine, 10).unwrap().halted);
    }

    #[test]
    fn alternating_machine_needs_no_bridges() {
        let m = parse_standard(
            "counters: 1\ninit q\nfinal h\nq: if c=0 goto p else dec goto p2\np: inc c goto h\np2: inc c goto q\n",
        )
        .unwrap();
        let conv = convert_minsky(&m);
        assert_eq!(conv.bridges, 0);
        assert!(validate(&conv.machine).is_empty());
    }
}
