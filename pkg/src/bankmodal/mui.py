"""Market Uncertainty Index from latent-distribution variances.

Each firm-quarter carries a diagonal Gaussian over the latent space,
inferred from its tabular features alone.  Because the covariance is
diagonal, the standard deviation of the summed latent coordinates is the
root of the summed variances.  Firm-quarters are first averaged into
firm-years (parameter-wise, over the observed quarters), and the index
for a year is the log of the total firm-level standard deviation:

    MUI = ln( sum over firms of sqrt( sum of latent variances ) )

The index depends on the variances only, never the means, and scaling all
variances by c shifts it by exactly half ln c.  Splitting firms into
groups and exponentiating gives an exact decomposition: exp of the
overall index equals the sum of exp of the group indices.

Groups follow the ten Standard Industrial Classification divisions
(agriculture through public administration); a lookup from 4-digit SIC
codes is included.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .panel import ValidationError

# division number, first and last 4-digit SIC code, short name
SIC_DIVISIONS = (
    (1, 100, 999, "agriculture, forestry, and fishing"),
    (2, 1000, 1499, "mining"),
    (3, 1500, 1799, "construction"),
    (4, 2000, 3999, "manufacturing"),
    (5, 4000, 4999, "transportation, communications, electric, gas, and sanitary"),
    (6, 5000, 5199, "wholesale trade"),
    (7, 5200, 5999, "retail trade"),
    (8, 6000, 6799, "finance, insurance, and real estate"),
    (9, 7000, 8999, "services"),
    (10, 9100, 9999, "public administration"),
)

OVERALL_DIVISION = 0


def division_of_sic(code):
    """Map a 4-digit SIC code to its division number (1-10)."""
    code = int(code)
    for div, lo, hi, _ in SIC_DIVISIONS:
        if lo <= code <= hi:
            return div
    raise ValidationError("SIC code %d has no division" % code)


@dataclass
class CompanyLatent:
    """Latent Gaussian parameters for one firm at one quarter (or year)."""

    firm_id: str
    quarter: tuple
    mu: np.ndarray
    var: np.ndarray

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=np.float64).ravel()
        self.var = np.asarray(self.var, dtype=np.float64).ravel()
        if self.mu.shape != self.var.shape or self.mu.size == 0:
            raise ValidationError("mu and var must be aligned nonempty vectors")
        if not np.all(self.var > 0):
            raise ValidationError("latent variances must be positive for %s"
                                  % self.firm_id)


def company_std(latent):
    """Standard deviation of the summed latent coordinates: sqrt(sum var)."""
    return float(np.sqrt(latent.var.sum()))


def yearly_average_latent(latents, year):
    """Average one firm's quarterly parameters over a year, elementwise.

    Only quarters observed in the given year count; both mu and var are
    arithmetic means over those quarters.
    """
    group = [l for l in latents if l.quarter[0] == year]
    if not group:
        raise ValidationError("no quarters observed in %d" % year)
    firm_ids = {l.firm_id for l in group}
    if len(firm_ids) != 1:
        raise ValidationError("yearly average mixes firms: %s"
                              % ", ".join(sorted(firm_ids)))
    mu = np.mean([l.mu for l in group], axis=0)
    var = np.mean([l.var for l in group], axis=0)
    return CompanyLatent(group[0].firm_id, (year, 1), mu, var)


def mui(latents):
    """Log of the summed per-company standard deviations."""
    if not latents:
        raise ValidationError("the index needs at least one company")
    return float(np.log(sum(company_std(l) for l in latents)))


def _yearly_by_firm(latents):
    by_firm_year = {}
    for l in latents:
        by_firm_year.setdefault((l.firm_id, l.quarter[0]), []).append(l)
    out = {}
    for (firm_id, year), group in sorted(by_firm_year.items()):
        out.setdefault(year, []).append(yearly_average_latent(group, year))
    return out


def mui_series(latents):
    """Year -> MUI over all firms, averaging quarters within each firm-year."""
    return {year: mui(group) for year, group in _yearly_by_firm(latents).items()}


def mui_by_division(latents, sic_map):
    """Per-division yearly series; sic_map sends firm_id to division 1-10.

    Every firm must be mapped; empty division-years are simply absent.
    """
    unmapped = sorted({l.firm_id for l in latents} - set(sic_map))
    if unmapped:
        raise ValidationError("firms without a SIC division: %s"
                              % ", ".join(unmapped))
    bad = sorted({f for f, d in sic_map.items() if not 1 <= int(d) <= 10})
    if bad:
        raise ValidationError("divisions must be 1-10, offending firms: %s"
                              % ", ".join(bad))
    series = {}
    for year, group in _yearly_by_firm(latents).items():
        by_div = {}
        for latent in group:
            by_div.setdefault(int(sic_map[latent.firm_id]), []).append(latent)
        for div, members in by_div.items():
            series.setdefault(div, {})[year] = mui(members)
    return series


def mui_table(latents, sic_map=None):
    """Rows (year, division, value) with division 0 carrying the overall index."""
    rows = [(year, OVERALL_DIVISION, value)
            for year, value in sorted(mui_series(latents).items())]
    if sic_map is not None:
        for div, by_year in sorted(mui_by_division(latents, sic_map).items()):
            rows.extend((year, div, value) for year, value in sorted(by_year.items()))
    rows.sort()
    return rows


def write_mui_csv(rows, path):
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["year", "division", "mui"])
        for year, div, value in rows:
            writer.writerow([year, div, repr(float(value))])
