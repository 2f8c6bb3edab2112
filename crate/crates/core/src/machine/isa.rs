//! Instruction set of the reference prefix machine.
//!
//! Opcodes are unary: opcode `k` is `1^k 0` for `k < 9`, and `1^9` is the
//! last opcode. That is a complete prefix code, so every bit string parses
//! into a unique instruction prefix.
//!
//! | code        | instruction | operands                          |
//! |-------------|-------------|-----------------------------------|
//! | `0`         | END         | closes a block; at top level halts |
//! | `10`        | YENC t      | emit the code `ȳ_t` of `Y[t]`      |
//! | `110`       | REP c B     | run block `B` `c` times            |
//! | `1110`      | HDR         | emit the code of `|X|`             |
//! | `11110`     | XRAW t      | emit `X[t]` as is                  |
//! | `111110`    | LIST Z̄      | read a list code, emit it verbatim |
//! | `1111110`   | LIT x̄       | read a string code, emit `x`       |
//! | `11111110`  | ENC B       | emit the string code of `B`'s output |
//! | `111111110` | YRAW t      | emit `Y[t]` as is                  |
//! | `111111111` | LOOP B      | run block `B` forever              |
//!
//! Index operands `t` are fixed width: `⌈log₂ m⌉` bits for a list of `m`
//! elements, so their cost grows logarithmically with the list. Counts `c`
//! are `0` for `|X|-1`, `10` for `|X|`, and `11` followed by a literal of
//! `bit_width(|X|)` bits.

use std::fmt;

use crate::codec::{encode_nat, encode_string, BitReader, BitString};

pub const ISA_VERSION: &str = "1";

/// Length of the `LIST` opcode plus the closing `END`.
pub const LIST_LITERAL_OVERHEAD: usize = 7;

const OPCODE_COUNT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Opcode {
    End,
    YEnc,
    Repeat,
    Header,
    XRaw,
    ListLit,
    Lit,
    Enc,
    YRaw,
    Loop,
}

impl Opcode {
    const ALL: [Opcode; OPCODE_COUNT] = [
        Opcode::End,
        Opcode::YEnc,
        Opcode::Repeat,
        Opcode::Header,
        Opcode::XRaw,
        Opcode::ListLit,
        Opcode::Lit,
        Opcode::Enc,
        Opcode::YRaw,
        Opcode::Loop,
    ];

    fn ones(self) -> usize {
        self as usize
    }

    pub fn code(self) -> BitString {
        let mut out = BitString::new();
        out.push_repeated(true, self.ones());
        if self.ones() < OPCODE_COUNT - 1 {
            out.push(false);
        }
        out
    }

    fn read(reader: &mut BitReader<'_>) -> Option<Opcode> {
        let mut ones = 0;
        while ones < OPCODE_COUNT - 1 {
            if !reader.read_bit()? {
                break;
            }
            ones += 1;
        }
        Some(Self::ALL[ones])
    }
}

/// Repetition count of a `REP` instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Count {
    AllButOne,
    All,
    Literal(usize),
}

impl Count {
    pub fn resolve(self, env: &Environment) -> usize {
        match self {
            Count::AllButOne => env.xs.len().saturating_sub(1),
            Count::All => env.xs.len(),
            Count::Literal(k) => k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Stmt {
    YEnc(usize),
    Repeat(Count, Vec<Stmt>),
    Header,
    XRaw(usize),
    /// Verbatim list code.
    ListLit(BitString),
    Lit(BitString),
    Enc(Vec<Stmt>),
    YRaw(usize),
    Loop(Vec<Stmt>),
}

/// What the machine knows from its conditional input: the two lists of a
/// context code `X̄ Ȳ`. Conditions that do not decode that way give empty
/// lists.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Environment {
    pub xs: Vec<BitString>,
    pub ys: Vec<BitString>,
}

impl Environment {
    pub fn from_condition(condition: &BitString) -> Self {
        let mut reader = BitReader::new(condition.bits());
        let decoded = (|| Some((reader.read_list()?, reader.read_list()?)))();
        match decoded {
            Some((xs, ys)) if reader.is_exhausted() => Environment { xs, ys },
            _ => Environment::default(),
        }
    }

    pub fn x_index_width(&self) -> usize {
        index_width(self.xs.len())
    }

    pub fn y_index_width(&self) -> usize {
        index_width(self.ys.len())
    }

    pub fn count_width(&self) -> usize {
        bit_width(self.xs.len())
    }
}

/// Bits needed to address `m` elements.
pub fn index_width(m: usize) -> usize {
    if m <= 1 {
        0
    } else {
        bit_width(m - 1)
    }
}

/// Bits needed to write `n` in binary.
pub fn bit_width(n: usize) -> usize {
    (usize::BITS - n.leading_zeros()) as usize
}

/// Why a bit string is not a well-formed program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseFault {
    ReadPastProgram,
    TrailingInput,
    InvalidOperand,
}

struct Parser<'a, 'e> {
    reader: BitReader<'a>,
    env: &'e Environment,
}

impl Parser<'_, '_> {
    fn need<T>(v: Option<T>) -> Result<T, ParseFault> {
        v.ok_or(ParseFault::ReadPastProgram)
    }

    fn index(&mut self, width: usize, len: usize) -> Result<usize, ParseFault> {
        let t = Self::need(self.reader.read_uint(width))? as usize;
        if t >= len {
            return Err(ParseFault::InvalidOperand);
        }
        Ok(t)
    }

    fn count(&mut self) -> Result<Count, ParseFault> {
        if !Self::need(self.reader.read_bit())? {
            return Ok(Count::AllButOne);
        }
        if !Self::need(self.reader.read_bit())? {
            return Ok(Count::All);
        }
        let k = Self::need(self.reader.read_uint(self.env.count_width()))?;
        Ok(Count::Literal(k as usize))
    }

    /// Statements up to and including the closing END.
    fn block(&mut self) -> Result<Vec<Stmt>, ParseFault> {
        let mut stmts = Vec::new();
        loop {
            let stmt = match Self::need(Opcode::read(&mut self.reader))? {
                Opcode::End => return Ok(stmts),
                Opcode::YEnc => Stmt::YEnc(self.index(self.env.y_index_width(), self.env.ys.len())?),
                Opcode::Repeat => {
                    let count = self.count()?;
                    Stmt::Repeat(count, self.block()?)
                }
                Opcode::Header => Stmt::Header,
                Opcode::XRaw => Stmt::XRaw(self.index(self.env.x_index_width(), self.env.xs.len())?),
                Opcode::ListLit => {
                    let start = self.reader.position();
                    let mut probe = self.reader.clone();
                    Self::need(probe.read_list())?;
                    let len = probe.position() - start;
                    Stmt::ListLit(Self::need(self.reader.read_raw(len))?)
                }
                Opcode::Lit => Stmt::Lit(Self::need(self.reader.read_string())?),
                Opcode::Enc => Stmt::Enc(self.block()?),
                Opcode::YRaw => Stmt::YRaw(self.index(self.env.y_index_width(), self.env.ys.len())?),
                Opcode::Loop => Stmt::Loop(self.block()?),
            };
            stmts.push(stmt);
        }
    }
}

/// Parses a whole program: a top-level block whose END is the last bit.
pub fn parse(program: &BitString, env: &Environment) -> Result<Vec<Stmt>, ParseFault> {
    let mut parser = Parser {
        reader: BitReader::new(program.bits()),
        env,
    };
    let stmts = parser.block()?;
    if !parser.reader.is_exhausted() {
        return Err(ParseFault::TrailingInput);
    }
    Ok(stmts)
}

fn assemble_block(stmts: &[Stmt], env: &Environment, out: &mut BitString) {
    for stmt in stmts {
        match stmt {
            Stmt::YEnc(t) => {
                out.extend_from(&Opcode::YEnc.code());
                out.extend_from(&BitString::from_uint(*t as u64, env.y_index_width()));
            }
            Stmt::Repeat(count, body) => {
                out.extend_from(&Opcode::Repeat.code());
                match count {
                    Count::AllButOne => out.push(false),
                    Count::All => {
                        out.push(true);
                        out.push(false);
                    }
                    Count::Literal(k) => {
                        out.push(true);
                        out.push(true);
                        out.extend_from(&BitString::from_uint(*k as u64, env.count_width()));
                    }
                }
                assemble_block(body, env, out);
            }
            Stmt::Header => out.extend_from(&Opcode::Header.code()),
            Stmt::XRaw(t) => {
                out.extend_from(&Opcode::XRaw.code());
                out.extend_from(&BitString::from_uint(*t as u64, env.x_index_width()));
            }
            Stmt::ListLit(code) => {
                out.extend_from(&Opcode::ListLit.code());
                out.extend_from(code);
            }
            Stmt::Lit(x) => {
                out.extend_from(&Opcode::Lit.code());
                out.extend_from(&encode_string(x));
            }
            Stmt::Enc(body) => {
                out.extend_from(&Opcode::Enc.code());
                assemble_block(body, env, out);
            }
            Stmt::YRaw(t) => {
                out.extend_from(&Opcode::YRaw.code());
                out.extend_from(&BitString::from_uint(*t as u64, env.y_index_width()));
            }
            Stmt::Loop(body) => {
                out.extend_from(&Opcode::Loop.code());
                assemble_block(body, env, out);
            }
        }
    }
    out.extend_from(&Opcode::End.code());
}

/// Inverse of [`parse`] for well-formed statement lists.
pub fn assemble(stmts: &[Stmt], env: &Environment) -> BitString {
    let mut out = BitString::new();
    assemble_block(stmts, env, &mut out);
    out
}

/// The literal program emitting `target`: `LIST` when `target` is itself a
/// list code (the usual case for function tables), otherwise `LIT`,
/// whichever is shorter.
pub fn literal_program(target: &BitString) -> BitString {
    let mut reader = BitReader::new(target.bits());
    let is_list = reader.read_list().is_some() && reader.is_exhausted();
    let env = Environment::default();
    let lit = assemble(&[Stmt::Lit(target.clone())], &env);
    if is_list {
        let list = assemble(&[Stmt::ListLit(target.clone())], &env);
        if list.len() <= lit.len() {
            return list;
        }
    }
    lit
}

struct Listing<'a>(&'a [Stmt]);

impl fmt::Display for Listing<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, stmt) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            match stmt {
                Stmt::YEnc(t) => write!(f, "YENC {t}")?,
                Stmt::Repeat(c, body) => {
                    let c = match c {
                        Count::AllButOne => "|X|-1".to_string(),
                        Count::All => "|X|".to_string(),
                        Count::Literal(k) => k.to_string(),
                    };
                    write!(f, "REP {c} {{{}}}", Listing(body))?
                }
                Stmt::Header => f.write_str("HDR")?,
                Stmt::XRaw(t) => write!(f, "XRAW {t}")?,
                Stmt::ListLit(code) => write!(f, "LIST {code}")?,
                Stmt::Lit(x) => write!(f, "LIT {x}")?,
                Stmt::Enc(body) => write!(f, "ENC {{{}}}", Listing(body))?,
                Stmt::YRaw(t) => write!(f, "YRAW {t}")?,
                Stmt::Loop(body) => write!(f, "LOOP {{{}}}", Listing(body))?,
            }
        }
        Ok(())
    }
}

/// Human-readable listing, or `None` if the program does not parse.
pub fn disassemble(program: &BitString, env: &Environment) -> Option<String> {
    parse(program, env).ok().map(|stmts| Listing(&stmts).to_string())
}

/// Code of `|X|` as the `HDR` instruction emits it.
pub(crate) fn header_code(env: &Environment) -> BitString {
    encode_nat(env.xs.len())
}

pub(crate) fn y_code(env: &Environment, t: usize) -> BitString {
    encode_string(&env.ys[t])
}
