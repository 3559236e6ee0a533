use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("box used but the signature has no box")]
    BoxNotAllowed,
    #[error("m^n needs at least one argument")]
    EmptyArgs,
    #[error("variable x{0} has no value")]
    UnassignedVariable(u32),
    #[error("constant `{0}` is not declared in the algebra")]
    UndeclaredConstant(String),
    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),
    #[error("line {line}: {msg}")]
    File { line: usize, msg: String },
    #[error("not a nearlattice: {0}")]
    NotNearlattice(String),
    #[error("not a distributive nearlattice: {0}")]
    NotDistributive(String),
    #[error("order has a cycle through `{0}`")]
    Cycle(String),
    #[error("no join for `{0}` and `{1}`")]
    NoJoin(String, String),
    #[error("upset of `{0}` is not a lattice: `{1}` and `{2}` have no meet there")]
    UpsetNotLattice(String, String, String),
    #[error("size {size} exceeds the limit {limit} for {what}")]
    SizeGuard { what: &'static str, size: usize, limit: usize },
    #[error("generating set is empty")]
    EmptyGenerators,
    #[error("malformed partition: {0}")]
    MalformedPartition(String),
    #[error("malformed closure system: {0}")]
    MalformedClosureSystem(String),
    #[error("no top element declared{0}")]
    MissingTop(String),
    #[error("box does not fix the top element")]
    BoxTopNotFixed,
    #[error("algebra is not a member of the class")]
    NotInClass,
    #[error("the class is empty")]
    EmptyClass,
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
    #[error("{0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
