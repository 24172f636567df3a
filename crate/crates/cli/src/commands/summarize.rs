use survkit::dataset::summarize;
use survkit::Result;

use super::{load_cohort, print_table, start};
use crate::GlobalArgs;

pub fn run(g: &GlobalArgs) -> Result<()> {
    let mut run = start(g, "summarize")?;
    let records = load_cohort(g, &mut run)?;
    let summary = summarize(&records);
    for empty in &summary.empty_groups {
        run.note(format!("no records with outcome `{}`", empty.as_str()));
    }
    let (header, rows) = summary.table();
    run.write_with("summary.csv", |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(&header)?;
        for r in &rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    })?;
    run.json("summary.json", &summary)?;
    println!("{}", summary.size_line());
    print_table(&header, &rows);
    run.finish()
}
