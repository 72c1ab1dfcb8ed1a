import pytest


class TranscriptStore:
    """Transcripts accumulated by the acceptance criteria; the replay
    criterion re-checks every one of them."""

    def __init__(self):
        self.items = []

    def extend(self, transcripts):
        self.items.extend(transcripts)

    def append(self, transcript):
        self.items.append(transcript)


@pytest.fixture(scope="session")
def transcript_store():
    return TranscriptStore()
