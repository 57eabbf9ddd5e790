def predict_income(df):
    """Predict income bracket rows of a dataframe."""
    model = joblib.load(hf_hub_download("scikit-learn/adult-census-income", "model.joblib"))
    features = df[["age", "education-num", "hours-per-week"]]
    preds = model.predict(features)
    return list(preds)
