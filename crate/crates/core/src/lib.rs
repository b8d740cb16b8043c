pub mod appscan;
pub mod cli;
pub mod format;
pub mod icfg;
pub mod ir;
pub mod oracle;
pub mod refine;
pub mod rulegen;
pub mod solver;
pub mod symexec;
pub mod value;
