//! Inputs shared by the benchmarks.

/// A deterministic CSV table with `rows` rows of mixed column types.
pub fn sample_csv(rows: usize) -> String {
    let teams = ["red", "blue", "green", "gold"];
    let mut out = String::from("player,team,points,rating,active,city\n");
    for i in 0..rows {
        let points = (i * 37) % 101;
        let rating = if i % 13 == 0 {
            String::new()
        } else {
            format!("{:.2}", (i % 50) as f64 / 7.0)
        };
        out.push_str(&format!(
            "p{i},{},{points},{rating},{},c{}\n",
            teams[i % teams.len()],
            if i % 3 == 0 { "True" } else { "False" },
            i % 17
        ));
    }
    out
}

pub const QUERIES: &[(&str, &str)] = &[
    (
        "lookup",
        "df[df['player'] == 'p42']['points'].iloc[0] == 38",
    ),
    (
        "filter_count",
        "len(df[(df['points'] > 50) & (df['team'] == 'red')]) > 10",
    ),
    (
        "aggregate",
        "df['rating'].mean() > df['points'].max() / 100",
    ),
    (
        "groupby",
        "df.groupby('team')['points'].sum().idxmax() == 'red'",
    ),
    (
        "sort_head",
        "df.sort_values(by='points', ascending=False).head(5)['player'].tolist()",
    ),
    (
        "strings",
        "df[df['city'].str.contains('1')]['points'].sum()",
    ),
];
