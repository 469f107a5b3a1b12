//! Plain-text rendering of summary statistics.
//!
//! One row per scope (`all`, then studies by id), columns in a fixed order.
//! Rates are percentages with two decimals.

use std::fmt::Write;

use ema_server::{Summary, SummaryStats};

pub const COLUMNS: [&str; 15] = [
    "scope",
    "verified",
    "active",
    "activation_%",
    "followup_users",
    "followup_%",
    "mean_followups",
    "answersheets",
    "baseline",
    "followup",
    "android",
    "ios",
    "android_per_ios",
    "age_mean",
    "age_sd",
];

fn cells(scope: &str, s: &SummaryStats) -> Vec<String> {
    vec![
        scope.to_string(),
        s.verified_users.to_string(),
        s.active_users.to_string(),
        format!("{:.2}", s.activation_rate * 100.0),
        s.followup_users.to_string(),
        format!("{:.2}", s.followup_rate * 100.0),
        format!("{:.2}", s.mean_followups_per_followup_user),
        s.answersheets_total.to_string(),
        s.baseline_answersheets.to_string(),
        s.followup_answersheets.to_string(),
        s.android_users.to_string(),
        s.ios_users.to_string(),
        format!("{:.2}", s.os_ratio),
        format!("{:.2}", s.age_mean),
        format!("{:.2}", s.age_sd),
    ]
}

pub fn render(summary: &Summary) -> String {
    let mut rows = vec![COLUMNS.iter().map(|c| c.to_string()).collect::<Vec<_>>()];
    rows.push(cells("all", &summary.global));
    rows.extend(summary.studies.iter().map(|(id, s)| cells(id, s)));
    let widths: Vec<usize> =
        (0..COLUMNS.len()).map(|i| rows.iter().map(|r| r[i].chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    let _ = writeln!(out, "users_total {}  history_entries {}", summary.users_total, summary.history_entries);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_summary_is_a_zero_row() {
        let text = render(&Summary::default());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("scope"));
        let zero: Vec<&str> = lines[1].split_whitespace().collect();
        assert_eq!(zero[0], "all");
        assert!(zero[1..].iter().all(|c| c.parse::<f64>().unwrap() == 0.0));
    }
}
