use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("infeasible schedule: {0}")]
    Infeasible(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(vqa_core::Error),
}

impl BenchError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        BenchError::Io { path: path.to_path_buf(), source }
    }

    /// 0 ok, 1 other failures, 2 configuration, 3 infeasible budget or schedule.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) => 2,
            BenchError::Infeasible(_) => 3,
            BenchError::Io { .. } | BenchError::Core(_) => 1,
        }
    }
}

impl From<vqa_core::Error> for BenchError {
    fn from(e: vqa_core::Error) -> Self {
        match e {
            vqa_core::Error::ScheduleInfeasible(m) => BenchError::Infeasible(m),
            vqa_core::Error::InvalidConfig(m) => BenchError::Config(vec![m]),
            other => BenchError::Core(other),
        }
    }
}
