#![no_main]

use clap::Parser;
use libfuzzer_sys::fuzz_target;
use risbc_cli::{execute, Cli, Task};

// Whitespace-separated argument list.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let argv = std::iter::once("risbc").chain(text.split_whitespace());
    let Ok(cli) = Cli::try_parse_from(argv) else {
        return;
    };
    let Ok(config) = cli.into_config() else {
        return;
    };
    if matches!(config.task, Task::Regions { .. } | Task::Compare { .. } | Task::Optimize { .. }) {
        let out = execute(&config).expect("validated input runs");
        assert!(!out.document.is_empty());
    }
});
