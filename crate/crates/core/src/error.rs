use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A probability vector does not sum to one, or holds a value outside [0, 1].
    NotStochastic { what: &'static str, sum: f64 },
    /// A scalar argument is outside its admissible range.
    OutOfRange { what: &'static str, value: f64 },
    /// Two sequences that must have the same length do not.
    LengthMismatch { expected: usize, actual: usize },
    /// A symbol index is not part of the alphabet.
    UnknownSymbol { symbol: usize, alphabet: usize },
    /// A message index outside `1..=M`.
    MessageOutOfRange { message: usize, messages: usize },
    /// No nonzero symbol yields a well defined cost ratio.
    UndefinedRatio,
    /// `D(W(.|x*) || W(.|0))` is infinite; the pulse is detectable without errors.
    NoiselessShortcut,
    /// `D(W(.|x*) || W(.|0))` is zero; the pulse carries no information.
    UselessSymbol,
    /// The number of messages is too small for the derived constants to be valid.
    TooFewMessages { messages: usize, reason: &'static str },
    /// The scheme parameters violate a structural invariant.
    InvalidConfig(&'static str),
    /// A decision region contains no window start.
    EmptyRegion { message: usize },
    /// The hypothesis-test threshold has not been calibrated yet.
    Uncalibrated,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotStochastic { what, sum } => {
                write!(f, "{what} is not a probability distribution (sum = {sum})")
            }
            Error::OutOfRange { what, value } => write!(f, "{what} out of range: {value}"),
            Error::LengthMismatch { expected, actual } => {
                write!(f, "length mismatch: expected {expected}, got {actual}")
            }
            Error::UnknownSymbol { symbol, alphabet } => {
                write!(f, "symbol {symbol} is not in an alphabet of size {alphabet}")
            }
            Error::MessageOutOfRange { message, messages } => {
                write!(f, "message {message} is outside 1..={messages}")
            }
            Error::UndefinedRatio => {
                f.write_str("every nonzero symbol has zero cost; the cost ratio is undefined")
            }
            Error::NoiselessShortcut => f.write_str(
                "divergence of the pulse symbol is infinite; detect the pulse directly",
            ),
            Error::UselessSymbol => f.write_str("pulse symbol has zero divergence from the free symbol"),
            Error::TooFewMessages { messages, reason } => {
                write!(f, "M = {messages} is too small: {reason}")
            }
            Error::InvalidConfig(why) => write!(f, "invalid scheme configuration: {why}"),
            Error::EmptyRegion { message } => {
                write!(f, "decision region of message {message} is empty")
            }
            Error::Uncalibrated => f.write_str("hypothesis-test threshold is not calibrated"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
