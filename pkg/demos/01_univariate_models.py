"""Demo: the three univariate forecasters on one quarterly series.

Builds a trending, seasonal revenue series, fits ARIMA (grid-searched
seasonal orders), ETS (auto-selected components), and the STL
decompose-then-forecast pipeline, and prints their 4-quarter forecasts
next to the truth.
"""

import numpy as np

from quartercast import (
    FiscalQuarter,
    QuarterlySeries,
    auto_select,
    auto_select_ets,
    forecast_arima,
    forecast_ets,
    quarter_add,
    stl_decompose,
    stlf_forecast,
)


def main():
    rng = np.random.default_rng(42)
    seasonal = [9.0, -3.0, -8.0, 2.0]
    n = 28
    values = [120.0 + 2.2 * t + seasonal[t % 4] + rng.normal(0, 1.2) for t in range(n)]
    history = QuarterlySeries("demo", FiscalQuarter(2009, 1), values[:24])
    truth = values[24:]

    print(f"history: {history.start}..{history.end} ({len(history)} quarters)")

    arima_fit = auto_select(history)
    print(f"\nARIMA selected order {arima_fit.order}, aicc {arima_fit.aicc:.2f}")
    arima_fc = forecast_arima(arima_fit, 4)

    ets_fit = auto_select_ets(history)
    print(f"ETS selected trend={ets_fit.spec.trend}, seasonal={ets_fit.spec.seasonal}, "
          f"alpha={ets_fit.alpha:.3f}")
    ets_fc = forecast_ets(ets_fit, 4)

    dec = stl_decompose(history)
    print(f"STL seasonal by position: {[round(v, 2) for v in dec.seasonal_by_position()]}")
    stl_fc = stlf_forecast(history, 4)

    print("\nquarter      truth     arima       ets       stl   average")
    for k in range(4):
        avg = (arima_fc[k] + ets_fc[k] + stl_fc[k]) / 3.0
        q = quarter_add(history.end, k + 1)
        print(f"{q}    {truth[k]:8.2f}  {arima_fc[k]:8.2f}  {ets_fc[k]:8.2f}  "
              f"{stl_fc[k]:8.2f}  {avg:8.2f}")


if __name__ == "__main__":
    main()
