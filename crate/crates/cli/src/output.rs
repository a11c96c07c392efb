use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clickstat::dataio::{write_report, Report, Table};

use crate::config::Format;
use crate::error::{CliError, CliResult};

/// Where a command's report and tables go.
pub struct Output {
    dir: Option<PathBuf>,
    format: Format,
}

impl Output {
    pub fn new(dir: Option<PathBuf>, format: Format) -> Self {
        Self { dir, format }
    }

    /// Creates the output directory, if one was requested.
    pub fn prepare(&self) -> CliResult<Option<&Path>> {
        if let Some(dir) = &self.dir {
            fs::create_dir_all(dir).map_err(|e| CliError::from(e).at(dir))?;
        }
        Ok(self.dir.as_deref())
    }

    /// Writes `<command>.json` and `<name>.csv` per table into the output
    /// directory, and the report or tables to standard output when no
    /// directory was given.
    pub fn emit(&self, report: &Report, tables: &[(String, Table)]) -> CliResult<()> {
        if let Some(dir) = self.prepare()? {
            let path = dir.join(format!("{}.json", report.command));
            write_report(&path, report).map_err(|e| CliError::from(e).at(&path))?;
            for (name, table) in tables {
                let path = dir.join(format!("{name}.csv"));
                table.write(&path).map_err(|e| CliError::from(e).at(&path))?;
            }
            return Ok(());
        }
        let mut stdout = io::stdout().lock();
        match self.format {
            Format::Json => stdout.write_all(report.to_json()?.as_bytes())?,
            Format::Csv => {
                for (i, (name, table)) in tables.iter().enumerate() {
                    if i > 0 {
                        writeln!(stdout)?;
                    }
                    writeln!(stdout, "# {name}")?;
                    stdout.write_all(table.to_csv().as_bytes())?;
                }
            }
        }
        stdout.flush()?;
        Ok(())
    }
}
