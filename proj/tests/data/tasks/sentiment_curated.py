#!/usr/bin/env python3
# %% install
import subprocess
requirements = ["transformers", "torch"]
for package in requirements:
    subprocess.run(['pip', 'install', '-U', package])
# %% imports
from transformers import pipeline
# %% signature
def analyze_sentiment(text: str) -> dict:
# %% docstring
    """
    Classify the sentiment of an English sentence with a pretrained model.

    Args:
        text (str): The sentence to classify.

    Returns:
        dict: A mapping with the predicted 'label' and its 'score'.

    Raises:
        ValueError: If the input text is empty.
    """
# %% implementation
    if not text or not text.strip():
        raise ValueError("text must not be empty")
    classifier = pipeline("sentiment-analysis", model="distilbert-base-uncased-finetuned-sst-2-english")
    result = classifier(text)[0]
    return {"label": result["label"], "score": float(result["score"])}

# %% tests
def test_analyze_sentiment():
    print("Testing started.")

    print("Test case [1/3] started.")
    try:
        out = analyze_sentiment("I love this movie!")
        assert isinstance(out, dict), f"Test case [1/3] failed: expected dict, got {type(out)}"
        print(f"Test case [1/3] succeeded: {out}")
    except Exception as e:
        print(f"Test case [1/3] failed: unexpected exception\nerror:", e)

    print("Test case [2/3] started.")
    try:
        analyze_sentiment("")
        print(f"Test case [2/3] failed: empty input was accepted")
    except ValueError:
        print(f"Test case [2/3] succeeded: empty input rejected")

    print("Test case [3/3] started.")
    try:
        out = analyze_sentiment("This is terrible.")
        assert out["label"] == "NEGATIVE", f"Test case [3/3] failed: got {out['label']}"
        print(f"Test case [3/3] succeeded: {out['label']}")
    except Exception as e:
        print(f"Test case [3/3] failed: wrong label\nerror:", e)

    print("Testing finished.")

# %% test_invocation
test_analyze_sentiment()
