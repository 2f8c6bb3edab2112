use serde::{Deserialize, Serialize};

use super::isa::{header_code, parse, y_code, Environment, ParseFault, Stmt};
use crate::codec::{encode_string, BitString};
use crate::error::{Error, Result};

/// Resource bounds standing in for unbounded computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Budget {
    pub max_program_length: usize,
    pub max_steps: usize,
}

impl Budget {
    pub fn new(max_program_length: usize, max_steps: usize) -> Result<Self> {
        if max_program_length == 0 || max_steps == 0 {
            return Err(Error::InvalidBudget(format!(
                "both bounds must be at least 1 (got length {max_program_length}, steps {max_steps})"
            )));
        }
        Ok(Self {
            max_program_length,
            max_steps,
        })
    }

    /// Componentwise `≤`.
    pub fn within(&self, other: &Budget) -> bool {
        self.max_program_length <= other.max_program_length && self.max_steps <= other.max_steps
    }
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_program_length: 16,
            max_steps: 256,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Halted,
    StepBudgetExceeded,
    /// An instruction fetch needed bits beyond the end of the program.
    ReadPastProgram,
    /// The machine halted before reading the whole program.
    TrailingInput,
    /// An index operand addressed past the end of a condition list.
    InvalidOperand,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub output: Option<BitString>,
    pub steps_used: usize,
}

impl RunOutcome {
    pub fn halted(&self) -> bool {
        self.status == RunStatus::Halted
    }

    fn rejected(status: RunStatus) -> Self {
        Self {
            status,
            output: None,
            steps_used: 0,
        }
    }
}

struct StepLimit;

struct Exec<'e> {
    env: &'e Environment,
    steps: usize,
    max_steps: usize,
}

impl Exec<'_> {
    fn tick(&mut self) -> std::result::Result<(), StepLimit> {
        self.steps += 1;
        if self.steps > self.max_steps {
            Err(StepLimit)
        } else {
            Ok(())
        }
    }

    fn block(&mut self, stmts: &[Stmt], out: &mut BitString) -> std::result::Result<(), StepLimit> {
        for stmt in stmts {
            self.tick()?;
            match stmt {
                Stmt::YEnc(t) => out.extend_from(&y_code(self.env, *t)),
                Stmt::Repeat(count, body) => {
                    for _ in 0..count.resolve(self.env) {
                        self.tick()?;
                        self.block(body, out)?;
                    }
                }
                Stmt::Header => out.extend_from(&header_code(self.env)),
                Stmt::XRaw(t) => out.extend_from(&self.env.xs[*t]),
                Stmt::ListLit(code) => out.extend_from(code),
                Stmt::Lit(x) => out.extend_from(x),
                Stmt::Enc(body) => {
                    let mut inner = BitString::new();
                    self.block(body, &mut inner)?;
                    out.extend_from(&encode_string(&inner));
                }
                Stmt::YRaw(t) => out.extend_from(&self.env.ys[*t]),
                Stmt::Loop(body) => loop {
                    self.tick()?;
                    self.block(body, out)?;
                },
            }
        }
        Ok(())
    }
}

/// The reference machine with its conditional input already decoded.
#[derive(Debug, Clone)]
pub struct Machine {
    env: Environment,
}

impl Machine {
    pub fn new(condition: &BitString) -> Self {
        Self {
            env: Environment::from_condition(condition),
        }
    }

    pub fn environment(&self) -> &Environment {
        &self.env
    }

    /// Runs `program` without checking its length against a budget.
    pub fn execute(&self, program: &BitString, max_steps: usize) -> RunOutcome {
        let stmts = match parse(program, &self.env) {
            Ok(stmts) => stmts,
            Err(ParseFault::ReadPastProgram) => return RunOutcome::rejected(RunStatus::ReadPastProgram),
            Err(ParseFault::TrailingInput) => return RunOutcome::rejected(RunStatus::TrailingInput),
            Err(ParseFault::InvalidOperand) => return RunOutcome::rejected(RunStatus::InvalidOperand),
        };
        let mut exec = Exec {
            env: &self.env,
            steps: 0,
            max_steps,
        };
        let mut out = BitString::new();
        match exec.block(&stmts, &mut out) {
            Ok(()) => RunOutcome {
                status: RunStatus::Halted,
                output: Some(out),
                steps_used: exec.steps,
            },
            Err(StepLimit) => RunOutcome {
                status: RunStatus::StepBudgetExceeded,
                output: None,
                steps_used: max_steps,
            },
        }
    }

    pub fn run(&self, program: &BitString, budget: Budget) -> Result<RunOutcome> {
        if program.len() > budget.max_program_length {
            return Err(Error::OutOfRange(format!(
                "program of {} bits exceeds the length budget {}",
                program.len(),
                budget.max_program_length
            )));
        }
        Ok(self.execute(program, budget.max_steps))
    }
}

/// Runs `program` given `condition` under `budget`.
pub fn run(program: &BitString, condition: &BitString, budget: Budget) -> Result<RunOutcome> {
    Machine::new(condition).run(program, budget)
}
