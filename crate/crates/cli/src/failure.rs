use std::fmt;
use std::process::ExitCode;

/// Failure classes and their process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    Config,
    Solver,
    Invariant,
    Io,
}

impl Class {
    pub fn code(self) -> u8 {
        match self {
            Self::Config => 2,
            Self::Solver => 3,
            Self::Invariant => 4,
            Self::Io => 5,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Config => "configuration error",
            Self::Solver => "solver failure",
            Self::Invariant => "invariant failure",
            Self::Io => "i/o error",
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub class: Class,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn new(class: Class, error: impl Into<anyhow::Error>) -> Self {
        Self {
            class,
            error: error.into(),
        }
    }

    pub fn msg(class: Class, msg: impl fmt::Display) -> Self {
        Self::new(class, anyhow::anyhow!("{msg}"))
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.class.code())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {:#}", self.class.label(), self.error)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::new(Class::Io, e)
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;

/// Attaches a failure class to any error.
pub trait Classify<T> {
    fn class(self, class: Class) -> Outcome<T>;
    fn class_with(self, class: Class, context: impl FnOnce() -> String) -> Outcome<T>;
}

impl<T, E> Classify<T> for std::result::Result<T, E>
where
    E: Into<anyhow::Error>,
{
    fn class(self, class: Class) -> Outcome<T> {
        self.map_err(|e| Failure::new(class, e))
    }

    fn class_with(self, class: Class, context: impl FnOnce() -> String) -> Outcome<T> {
        self.map_err(|e| Failure::new(class, e.into().context(context())))
    }
}

/// Core errors raised while reading files are I/O failures; the rest are
/// attributed to `fallback`.
pub fn core_class(e: &annulus_core::Error, fallback: Class) -> Class {
    use annulus_core::Error as E;
    match e {
        E::Io(_) | E::Csv(_) | E::Json(_) => Class::Io,
        _ => fallback,
    }
}

pub trait ClassifyCore<T> {
    fn or_class(self, fallback: Class) -> Outcome<T>;
}

impl<T> ClassifyCore<T> for annulus_core::Result<T> {
    fn or_class(self, fallback: Class) -> Outcome<T> {
        self.map_err(|e| Failure::new(core_class(&e, fallback), e))
    }
}
