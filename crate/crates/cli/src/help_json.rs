use clap::{Arg, ArgAction, Command};
use serde_json::{json, Value};

fn arg(a: &Arg) -> Value {
    let takes_value = !matches!(
        a.get_action(),
        ArgAction::SetTrue | ArgAction::SetFalse | ArgAction::Count | ArgAction::Help | ArgAction::Version
    );
    json!({
        "name": a.get_id().as_str(),
        "long": a.get_long(),
        "short": a.get_short().map(|c| c.to_string()),
        "help": a.get_help().map(|h| h.to_string()),
        "required": a.is_required_set(),
        "takes_value": takes_value,
        "default": a.get_default_values().iter().map(|v| v.to_string_lossy().into_owned()).collect::<Vec<_>>(),
        "possible_values": if takes_value {
            a.get_possible_values().iter().map(|v| v.get_name().to_string()).collect::<Vec<_>>()
        } else {
            Vec::new()
        },
    })
}

fn command(c: &Command) -> Value {
    json!({
        "name": c.get_name(),
        "about": c.get_about().map(|s| s.to_string()),
        "args": c.get_arguments().filter(|a| !a.is_hide_set()).map(arg).collect::<Vec<_>>(),
    })
}

/// JSON description of the command tree, flags and exit codes.
pub fn describe(root: &Command) -> String {
    let v = json!({
        "name": root.get_name(),
        "version": root.get_version(),
        "about": root.get_about().map(|s| s.to_string()),
        "global_args": root.get_arguments().map(arg).collect::<Vec<_>>(),
        "subcommands": root.get_subcommands().map(command).collect::<Vec<_>>(),
        "exit_codes": { "0": "success", "1": "output could not be written", "2": "config error", "3": "input file error" },
    });
    serde_json::to_string_pretty(&v).expect("serializable")
}
