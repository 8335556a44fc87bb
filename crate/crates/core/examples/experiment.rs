//! Runs a small experiment grid from inline settings and prints the
//! per-cell summary.
//!
//! ```text
//! cargo run --release --example experiment
//! ```

use spanparse::cli::experiment::{run_grid, summarize, summary_csv};
use spanparse::cli::settings::Settings;

const GRID: &str = "
embedding_dim = 16
hidden_dim = 32
ff_dim = 32
learning_rate = 0.005
epochs = 150
epochs_augmented = 5
patience = 40
st_epochs = 15
grid.budgets = 10/5, 20/5
grid.augment = 0, 500
grid.st_steps = 0, 2
grid.seeds = 1, 2
data.synthetic_size = 400
data.pool_size = 150
data.test_size = 150
";

fn main() -> spanparse::Result<()> {
    let mut settings = Settings::default();
    settings.apply_text(GRID)?;
    let results = run_grid(&settings)?;
    print!("{}", summary_csv(&summarize(&results)));
    Ok(())
}
