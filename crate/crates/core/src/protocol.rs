//! The per-processor program as a micro-step machine.
//!
//! Every activation of a processor performs pure local computation followed
//! by exactly one register access: a read of a neighbor's field, a read of
//! its own field, or a write of its own field. The program counter walks a
//! fixed slot layout; slots whose guard fails are skipped without consuming
//! an activation.
//!
//! Non-root slot layout for a node of degree `d`:
//!
//! | slots              | instruction                                   |
//! |--------------------|-----------------------------------------------|
//! | `0 .. d`           | read neighbor path `p`                        |
//! | `d`                | write own path (≺-minimum candidate)          |
//! | `d + 1`            | read own path, reset the count accumulators   |
//! | `d + 2 .. 2d + 2`  | per port: read child count / adjust in, out   |
//! | `2d + 2`           | write own count                               |
//! | `2d + 3`           | read own count                                |
//! | `2d + 4`           | read own path                                 |
//! | `2d + 5`           | if count is 0: write bcc := path, end cycle   |
//! | `2d + 6 .. 3d + 6` | per port: if parent, read its bcc             |
//! | `3d + 6`           | write bcc := parent's bcc                     |

use alloc::vec;
use alloc::vec::Vec;

use crate::graph::{Graph, NodeId};
use crate::path::{PathValue, BOTTOM, OVERFLOW};

/// The shared register of one processor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Register {
    pub path: PathValue,
    pub count: i64,
    pub bcc: PathValue,
}

impl Register {
    /// What the root writes forever: `(⟨⊥⟩, 0, ⟨⊥⟩)`.
    pub fn root() -> Register {
        Register {
            path: PathValue::root(),
            count: 0,
            bcc: PathValue::root(),
        }
    }
}

/// Register fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Field {
    Path,
    Count,
    Bcc,
}

/// Bounds shared by all processors of one network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    /// Maximum number of symbols in a path value (`N = n`).
    pub path_len: usize,
    /// Counts are clamped to `[-count, count]` (`B = n²`).
    pub count: i64,
    /// Upper bound on the degree of any node.
    pub max_degree: u32,
}

impl Bounds {
    pub fn for_graph(g: &Graph) -> Bounds {
        let n = g.n();
        Bounds {
            path_len: n,
            count: (n * n) as i64,
            max_degree: g.max_degree() as u32,
        }
    }

    /// Bits per path symbol: the alphabet is `⊥`, ports `1..=Δ`, and `⊤`.
    pub fn symbol_bits(&self) -> usize {
        ceil_log2(self.max_degree as u64 + 2)
    }

    pub fn count_bits(&self) -> usize {
        ceil_log2(2 * self.count as u64 + 1)
    }

    /// `2·N·⌈log2(Δ+2)⌉ + ⌈log2(2B+1)⌉`.
    pub fn register_bit_budget(&self) -> usize {
        2 * self.path_len * self.symbol_bits() + self.count_bits()
    }
}

fn ceil_log2(x: u64) -> usize {
    if x <= 1 {
        0
    } else {
        (64 - (x - 1).leading_zeros()) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncodeError {
    #[error("path of {len} symbols exceeds the bound {bound}")]
    PathTooLong { len: usize, bound: usize },
    #[error("symbol {symbol} is outside the port alphabet 1..={max_degree}")]
    SymbolOutOfRange { symbol: u32, max_degree: u32 },
    #[error("count {count} outside [-{bound}, {bound}]")]
    CountOutOfRange { count: i64, bound: i64 },
}

/// Bit-packed register image. Path lengths are carried by the framing of
/// the register, not inside the bit stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedRegister {
    pub bytes: Vec<u8>,
    pub bits: usize,
    pub path_symbols: usize,
    pub bcc_symbols: usize,
}

impl Register {
    pub fn encode(&self, bounds: &Bounds) -> Result<EncodedRegister, EncodeError> {
        let mut w = BitWriter::default();
        let width = bounds.symbol_bits();
        for path in [&self.path, &self.bcc] {
            if path.len() > bounds.path_len {
                return Err(EncodeError::PathTooLong {
                    len: path.len(),
                    bound: bounds.path_len,
                });
            }
            for &s in path.symbols() {
                let code = match s {
                    BOTTOM => 0,
                    OVERFLOW => bounds.max_degree as u64 + 1,
                    p if p <= bounds.max_degree => p as u64,
                    p => {
                        return Err(EncodeError::SymbolOutOfRange {
                            symbol: p,
                            max_degree: bounds.max_degree,
                        })
                    }
                };
                w.push(code, width);
            }
        }
        if self.count.abs() > bounds.count {
            return Err(EncodeError::CountOutOfRange {
                count: self.count,
                bound: bounds.count,
            });
        }
        w.push((self.count + bounds.count) as u64, bounds.count_bits());
        Ok(EncodedRegister {
            bits: w.bits,
            bytes: w.bytes,
            path_symbols: self.path.len(),
            bcc_symbols: self.bcc.len(),
        })
    }
}

#[derive(Default)]
struct BitWriter {
    bytes: Vec<u8>,
    bits: usize,
}

impl BitWriter {
    fn push(&mut self, value: u64, width: usize) {
        for i in (0..width).rev() {
            if self.bits.is_multiple_of(8) {
                self.bytes.push(0);
            }
            if (value >> i) & 1 == 1 {
                let last = self.bytes.len() - 1;
                self.bytes[last] |= 0x80 >> (self.bits % 8);
            }
            self.bits += 1;
        }
    }
}

/// Classification of one incident link, as seen from "my" side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkClass {
    Parent,
    Child,
    /// Non-tree link to an ancestor.
    OutgoingNonTree,
    /// Non-tree link from a descendant.
    IncomingNonTree,
    Unclassified,
}

/// Classifies the link between "me" and a neighbor from the two path
/// values. `my_port` is my index for the link, `their_port` the neighbor's.
pub fn classify_link(
    my_path: &PathValue,
    their_path: &PathValue,
    my_port: u32,
    their_port: u32,
) -> LinkClass {
    if let Some(s) = my_path.proper_suffix_after(their_path) {
        if s == [their_port] {
            LinkClass::Parent
        } else {
            LinkClass::OutgoingNonTree
        }
    } else if let Some(s) = their_path.proper_suffix_after(my_path) {
        if s == [my_port] {
            LinkClass::Child
        } else {
            LinkClass::IncomingNonTree
        }
    } else {
        LinkClass::Unclassified
    }
}

/// What a processor knows about its own position in the network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeContext {
    pub is_root: bool,
    /// `back_ports[p - 1]` is the index the neighbor at port `p` uses for
    /// the link back to this node.
    pub back_ports: Vec<u32>,
    pub bounds: Bounds,
}

impl NodeContext {
    pub fn new(g: &Graph, v: NodeId) -> NodeContext {
        NodeContext {
            is_root: v.is_root(),
            back_ports: g.back_ports(v).to_vec(),
            bounds: Bounds::for_graph(g),
        }
    }

    pub fn all(g: &Graph) -> Vec<NodeContext> {
        g.nodes().map(|v| NodeContext::new(g, v)).collect()
    }

    pub fn degree(&self) -> usize {
        self.back_ports.len()
    }

    pub fn program_len(&self) -> usize {
        if self.is_root {
            3
        } else {
            3 * self.degree() + 7
        }
    }

    pub fn instruction(&self, slot: usize) -> Instr {
        if self.is_root {
            root_instruction(slot)
        } else {
            nonroot_instruction(self.degree(), slot)
        }
    }

    fn clamp(&self, count: i64) -> i64 {
        count.clamp(-self.bounds.count, self.bounds.count)
    }
}

/// One slot of a processor's program. Ports are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Instr {
    RootWritePath,
    RootWriteCount,
    RootWriteBcc,
    ReadPath(u32),
    WritePath,
    ReadOwnPathForCount,
    CountPort(u32),
    WriteCount,
    ReadOwnCount,
    ReadOwnPathForBcc,
    WriteOwnBcc,
    ReadParentBcc(u32),
    WriteParentBcc,
}

fn root_instruction(slot: usize) -> Instr {
    match slot % 3 {
        0 => Instr::RootWritePath,
        1 => Instr::RootWriteCount,
        _ => Instr::RootWriteBcc,
    }
}

fn nonroot_instruction(d: usize, slot: usize) -> Instr {
    let s = slot % (3 * d + 7);
    match s {
        s if s < d => Instr::ReadPath(s as u32 + 1),
        s if s == d => Instr::WritePath,
        s if s == d + 1 => Instr::ReadOwnPathForCount,
        s if s < 2 * d + 2 => Instr::CountPort((s - d - 1) as u32),
        s if s == 2 * d + 2 => Instr::WriteCount,
        s if s == 2 * d + 3 => Instr::ReadOwnCount,
        s if s == 2 * d + 4 => Instr::ReadOwnPathForBcc,
        s if s == 2 * d + 5 => Instr::WriteOwnBcc,
        s if s < 3 * d + 6 => Instr::ReadParentBcc((s - 2 * d - 5) as u32),
        _ => Instr::WriteParentBcc,
    }
}

/// The root's cyclic schedule: three writes.
pub fn root_program() -> Vec<Instr> {
    (0..3).map(root_instruction).collect()
}

/// The cyclic slot schedule of a non-root processor of the given degree.
pub fn nonroot_program(degree: usize) -> Vec<Instr> {
    (0..3 * degree + 7)
        .map(|s| nonroot_instruction(degree, s))
        .collect()
}

/// Local variables of a processor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Locals {
    pub path: PathValue,
    pub count: i64,
    pub incoming: i64,
    pub outgoing: i64,
    pub read_path: Vec<PathValue>,
    pub read_count: Vec<i64>,
    pub read_bcc: Vec<PathValue>,
    /// Port whose bcc was last read as the parent's, pending the write.
    pub parent_port: Option<u32>,
}

impl Locals {
    pub fn for_degree(degree: usize) -> Locals {
        Locals {
            read_path: vec![PathValue::default(); degree],
            read_count: vec![0; degree],
            read_bcc: vec![PathValue::default(); degree],
            ..Locals::default()
        }
    }
}

/// Register, locals and program counter of one processor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ProcessorState {
    pub register: Register,
    pub locals: Locals,
    /// Any value is accepted; it is reduced modulo the program length.
    pub pc: usize,
}

impl ProcessorState {
    pub fn new(ctx: &NodeContext) -> ProcessorState {
        ProcessorState {
            register: Register::default(),
            locals: Locals::for_degree(ctx.degree()),
            pc: 0,
        }
    }
}

/// Read-only access to the registers of a processor's neighbors, by
/// 1-based port.
pub trait NeighborRegisters {
    fn read_path(&self, port: u32) -> PathValue;
    fn read_count(&self, port: u32) -> i64;
    fn read_bcc(&self, port: u32) -> PathValue;
}

/// The single register access an activation performed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Access {
    ReadNeighbor { port: u32, field: Field },
    ReadOwn(Field),
    Write(Field),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepRecord {
    /// Slot whose instruction performed the access.
    pub slot: usize,
    pub access: Access,
}

/// Executes one atomic step of the processor: local computation followed
/// by exactly one register access. Total on every state.
pub fn execute_step(
    state: &mut ProcessorState,
    ctx: &NodeContext,
    neighbors: &impl NeighborRegisters,
) -> StepRecord {
    let len = ctx.program_len();
    let mut slot = state.pc % len;
    // Reaches an access within one pass: slot 0 always accesses.
    loop {
        let mut next = (slot + 1) % len;
        let access = perform(state, ctx, neighbors, ctx.instruction(slot), &mut next);
        if let Some(access) = access {
            state.pc = next;
            return StepRecord { slot, access };
        }
        slot = next;
    }
}

fn perform(
    state: &mut ProcessorState,
    ctx: &NodeContext,
    view: &impl NeighborRegisters,
    instr: Instr,
    next: &mut usize,
) -> Option<Access> {
    let ProcessorState {
        register, locals, ..
    } = state;
    let d = ctx.degree();
    let back = |p: u32| ctx.back_ports[p as usize - 1];
    match instr {
        Instr::RootWritePath => {
            register.path = PathValue::root();
            Some(Access::Write(Field::Path))
        }
        Instr::RootWriteCount => {
            register.count = 0;
            Some(Access::Write(Field::Count))
        }
        Instr::RootWriteBcc => {
            register.bcc = PathValue::root();
            Some(Access::Write(Field::Bcc))
        }
        Instr::ReadPath(p) => {
            locals.read_path[p as usize - 1] = view.read_path(p);
            Some(Access::ReadNeighbor {
                port: p,
                field: Field::Path,
            })
        }
        Instr::WritePath => {
            let best = (1..=d as u32)
                .map(|p| locals.read_path[p as usize - 1].successor(back(p), ctx.bounds.path_len))
                .min()
                .unwrap_or_else(PathValue::overflow);
            register.path = best;
            Some(Access::Write(Field::Path))
        }
        Instr::ReadOwnPathForCount => {
            locals.path = register.path.clone();
            locals.count = 0;
            locals.incoming = 0;
            locals.outgoing = 0;
            Some(Access::ReadOwn(Field::Path))
        }
        Instr::CountPort(p) => {
            let theirs = &locals.read_path[p as usize - 1];
            match classify_link(&locals.path, theirs, p, back(p)) {
                LinkClass::Child => {
                    let c = view.read_count(p);
                    locals.read_count[p as usize - 1] = c;
                    locals.count += c;
                    return Some(Access::ReadNeighbor {
                        port: p,
                        field: Field::Count,
                    });
                }
                LinkClass::IncomingNonTree => {
                    locals.count -= 1;
                    locals.incoming += 1;
                }
                LinkClass::OutgoingNonTree => {
                    locals.count += 1;
                    locals.outgoing += 1;
                }
                LinkClass::Parent | LinkClass::Unclassified => {}
            }
            None
        }
        Instr::WriteCount => {
            register.count = ctx.clamp(locals.count);
            Some(Access::Write(Field::Count))
        }
        Instr::ReadOwnCount => {
            locals.count = register.count;
            Some(Access::ReadOwn(Field::Count))
        }
        Instr::ReadOwnPathForBcc => {
            locals.path = register.path.clone();
            locals.parent_port = None;
            Some(Access::ReadOwn(Field::Path))
        }
        Instr::WriteOwnBcc => {
            if locals.count == 0 {
                register.bcc = locals.path.clone();
                *next = 0;
                Some(Access::Write(Field::Bcc))
            } else {
                None
            }
        }
        Instr::ReadParentBcc(p) => {
            let theirs = &locals.read_path[p as usize - 1];
            if classify_link(&locals.path, theirs, p, back(p)) == LinkClass::Parent {
                locals.read_bcc[p as usize - 1] = view.read_bcc(p);
                locals.parent_port = Some(p);
                *next = 3 * d + 6;
                Some(Access::ReadNeighbor {
                    port: p,
                    field: Field::Bcc,
                })
            } else {
                None
            }
        }
        Instr::WriteParentBcc => match locals.parent_port.take() {
            Some(p) if p >= 1 && p as usize <= d => {
                register.bcc = locals.read_bcc[p as usize - 1].clone();
                Some(Access::Write(Field::Bcc))
            }
            _ => None,
        },
    }
}
