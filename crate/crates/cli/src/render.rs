use std::fmt::Write;

use ehpseq::ext_ehp::{EhpReport, ExtChart};

pub fn chart_tsv(chart: &ExtChart, representatives: bool) -> String {
    let mut out = String::from(if representatives { "n\ts\tt\tdim\trepresentatives\n" } else { "n\ts\tt\tdim\n" });
    for ((n, s, t), e) in chart.iter() {
        write!(out, "{n}\t{s}\t{t}\t{}", e.dim).unwrap();
        if representatives {
            write!(out, "\t{}", e.basis.join("; ")).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Adams chart of one sphere: column `t - s`, row `s`, one `*` per class.
pub fn chart_ascii(chart: &ExtChart, n: u32, s_max: usize, t_max: u32) -> String {
    let width = chart.iter().map(|(_, e)| e.dim).max().unwrap_or(1).max(1);
    let x_max = t_max as usize;
    let mut out = String::new();
    writeln!(out, "S^{n}  (x = t - s, y = s)").unwrap();
    for s in (0..=s_max).rev() {
        write!(out, "{s:>3} |").unwrap();
        for x in 0..=x_max {
            let dim = chart.dim(n, s, (x + s) as u32);
            let cell = "*".repeat(dim) + &".".repeat(width - dim.min(width));
            write!(out, " {cell}").unwrap();
        }
        out.push('\n');
    }
    write!(out, "    +").unwrap();
    for _ in 0..=x_max {
        write!(out, " {}", "-".repeat(width)).unwrap();
    }
    out.push('\n');
    write!(out, "     ").unwrap();
    for x in 0..=x_max {
        write!(out, " {:<width$}", x % 10).unwrap();
    }
    out.push('\n');
    out
}

pub fn ehp_tsv(reports: &[EhpReport]) -> String {
    let mut out = String::from(
        "n\tt\ts\tdim_source\tdim_middle\tdim_quotient\trank_p_prev\trank_p\trank_e\trank_h\n",
    );
    for r in reports {
        for row in &r.rows {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.n,
                r.t,
                row.s,
                row.dim_source,
                row.dim_middle,
                row.dim_quotient,
                row.rank_p_prev,
                row.rank_p,
                row.rank_e,
                row.rank_h
            )
            .unwrap();
        }
    }
    out
}

pub fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}
