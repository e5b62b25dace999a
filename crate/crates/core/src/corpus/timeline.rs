use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Affiliation {
    Government,
    Opposition,
    Other,
}

impl Affiliation {
    pub fn as_str(self) -> &'static str {
        match self {
            Affiliation::Government => "government",
            Affiliation::Opposition => "opposition",
            Affiliation::Other => "other",
        }
    }
}

/// One government: `[start, end)` with the governing party and the largest
/// (official) opposition party. An open `end` runs to the end of time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GovernmentPeriod {
    pub start: NaiveDate,
    #[serde(default)]
    pub end: Option<NaiveDate>,
    pub government: String,
    pub opposition: String,
}

impl GovernmentPeriod {
    pub fn contains(&self, date: NaiveDate) -> bool {
        date >= self.start && self.end.is_none_or(|end| date < end)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timeline {
    pub periods: Vec<GovernmentPeriod>,
}

impl Timeline {
    /// Sorts periods and checks they do not overlap.
    pub fn new(mut periods: Vec<GovernmentPeriod>) -> Result<Self> {
        periods.sort_by_key(|p| p.start);
        for w in periods.windows(2) {
            match w[0].end {
                Some(end) if end <= w[1].start => {}
                _ => {
                    return Err(Error::Config(format!(
                        "government periods starting {} and {} overlap",
                        w[0].start, w[1].start
                    )))
                }
            }
        }
        for p in &periods {
            if p.end.is_some_and(|end| end <= p.start) {
                return Err(Error::Config(format!("period starting {} ends before it starts", p.start)));
            }
        }
        Ok(Timeline { periods })
    }

    pub fn period_at(&self, date: NaiveDate) -> Option<&GovernmentPeriod> {
        self.periods.iter().find(|p| p.contains(date))
    }

    /// Affiliation of `party` on `date`; `None` when the date is not covered.
    pub fn affiliation(&self, party: &str, date: NaiveDate) -> Option<Affiliation> {
        let period = self.period_at(date)?;
        Some(if party == period.government {
            Affiliation::Government
        } else if party == period.opposition {
            Affiliation::Opposition
        } else {
            Affiliation::Other
        })
    }

    /// The period starting at `date`, and the one immediately before it.
    pub fn around(&self, date: NaiveDate) -> (Option<&GovernmentPeriod>, Option<&GovernmentPeriod>) {
        let after = self.periods.iter().position(|p| p.start == date);
        match after {
            Some(i) => (i.checked_sub(1).map(|j| &self.periods[j]), Some(&self.periods[i])),
            None => (None, None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    fn uk() -> Timeline {
        Timeline::new(vec![
            GovernmentPeriod {
                start: d("1997-05-01"),
                end: Some(d("2010-05-06")),
                government: "Labour".into(),
                opposition: "Conservative".into(),
            },
            GovernmentPeriod {
                start: d("1979-05-03"),
                end: Some(d("1997-05-01")),
                government: "Conservative".into(),
                opposition: "Labour".into(),
            },
        ])
        .unwrap()
    }

    #[test]
    fn affiliation_by_date() {
        let t = uk();
        assert_eq!(t.affiliation("Labour", d("1996-01-01")), Some(Affiliation::Opposition));
        assert_eq!(t.affiliation("Labour", d("1997-05-01")), Some(Affiliation::Government));
        assert_eq!(t.affiliation("Liberal Democrat", d("2000-01-01")), Some(Affiliation::Other));
        assert_eq!(t.affiliation("Labour", d("2011-01-01")), None);
    }

    #[test]
    fn overlap_rejected() {
        let mut periods = uk().periods;
        periods[0].end = Some(d("1998-01-01"));
        periods[1].start = d("1997-06-01");
        periods[1].end = None;
        assert!(Timeline::new(periods).is_err());
    }

    #[test]
    fn around_election() {
        let t = uk();
        let (before, after) = t.around(d("1997-05-01"));
        assert_eq!(before.unwrap().government, "Conservative");
        assert_eq!(after.unwrap().government, "Labour");
    }
}
