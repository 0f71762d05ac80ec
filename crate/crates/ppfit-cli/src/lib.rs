//! Library side of the `ppfit` binary: argument/config handling,
//! artifact formats, and the subcommand implementations. Kept as a lib
//! so integration tests can drive resolution and formats directly.

pub mod artifacts;
pub mod commands;
pub mod config;

use ppfit::Error;

/// Process exit code for an error: 2 for anything the user can fix in
/// the invocation, 3 for numerical failures of the run itself, 4 for
/// I/O and file-format trouble.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) | Error::OutOfDomain { .. } | Error::UnderDetermined { .. } => 2,
        Error::Singular(_) | Error::Diverged { .. } => 3,
        Error::Parse { .. } | Error::Io(_) => 4,
    }
}
