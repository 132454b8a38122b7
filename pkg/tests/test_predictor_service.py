import pytest

from app.exceptions import PredictorError
from app.schemas.predictor_schema import PredictorSpec
from app.schemas.workload_schema import InferenceTrace
from app.services.predictor_service import predict_arrivals


def history(**series):
    return InferenceTrace(counts={name: tuple(values) for name, values in series.items()})


def test_oracle_returns_the_actual_arrivals():
    forecast = predict_arrivals("oracle", history(a=()), {"a": [7, 0, 1]}, 3)

    assert forecast.series("a") == (7, 0, 1)


def test_oracle_needs_the_actual_arrivals():
    with pytest.raises(PredictorError) as error:
        predict_arrivals("oracle", history(a=()), None, 3)

    assert error.value.code == "oracle-without-actual"


def test_persistence_copies_the_previous_window():
    forecast = predict_arrivals("persistence", history(a=(9, 9, 9, 3, 5, 2)), None, 3)

    assert forecast.series("a") == (3, 5, 2)


def test_persistence_is_exact_on_a_window_periodic_trace():
    pattern = [4, 0, 13, 7, 7, 2, 9, 1]
    trace = pattern * 3
    size = len(pattern)

    forecast = predict_arrivals("persistence", history(a=trace[:2 * size]), None, size)
    actual = trace[2 * size:]

    assert sum(abs(p - a) for p, a in zip(forecast.series("a"), actual)) == 0


def test_ewma_blends_the_windows():
    forecast = predict_arrivals("ewma:0.5", history(a=(4, 4, 4, 8, 8, 8)), None, 3)

    assert forecast.series("a") == (6, 6, 6)


def test_ewma_with_alpha_one_is_persistence():
    data = history(a=(1, 2, 3, 4, 5, 6))

    assert predict_arrivals("ewma:1", data, None, 3) == predict_arrivals("persistence", data, None, 3)


def test_predictors_need_a_full_window_of_history():
    with pytest.raises(PredictorError) as error:
        predict_arrivals("persistence", history(a=(1, 2)), None, 3)

    assert error.value.code == "insufficient-history"


def test_alpha_out_of_range():
    with pytest.raises(PredictorError) as error:
        predict_arrivals(PredictorSpec(kind="ewma", alpha=1.5), history(a=(1, 2, 3)), None, 3)

    assert error.value.code == "alpha-out-of-range"


@pytest.mark.parametrize("text, kind, alpha", [
    ("oracle", "oracle", None),
    ("persistence", "persistence", None),
    ("ewma:0.25", "ewma", 0.25),
])
def test_predictor_spec_parsing(text, kind, alpha):
    spec = PredictorSpec.parse(text)

    assert spec.kind == kind
    assert spec.alpha == alpha
    assert spec.label() == text


def test_unknown_predictor():
    with pytest.raises(ValueError):
        PredictorSpec.parse("arima")
