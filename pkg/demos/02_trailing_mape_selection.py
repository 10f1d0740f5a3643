"""Demo: trailing-MAPE model selection (Model 1).

For the quarter after the latest actual, each candidate (arima, ets, stl,
and their average) is backtested one step ahead over the four most recent
quarters; the forecast of the candidate with the lowest realized MAPE is
reported.
"""

import numpy as np

from quartercast import FiscalQuarter, QuarterlySeries, model1_forecast, quarter_add


def main():
    rng = np.random.default_rng(7)
    seasonal = [6.0, -1.0, -7.0, 2.0]
    values = [200.0 + 1.5 * t + seasonal[t % 4] + rng.normal(0, 2.0) for t in range(26)]
    series = QuarterlySeries("Geo_1", FiscalQuarter(2009, 1), values)

    origin = series.end
    result = model1_forecast(series, origin)

    print(f"forecast origin: {origin}; target: {quarter_add(origin, 1)}\n")
    print("candidate   trailing MAPE   h=1 forecast")
    for name, cand in result.candidates.items():
        marker = "  <- chosen" if name == result.chosen else ""
        print(f"{name:<10}  {cand.trailing_mape:12.4f}   {cand.forecast:11.2f}{marker}")
    print(f"\nfinal forecast: {result.forecast:.2f} (from {result.chosen})")


if __name__ == "__main__":
    main()
