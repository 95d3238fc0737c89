from lambdaq.services.runner import LambdaQService


# Service dependencies
def get_lambdaq_service() -> LambdaQService:
    # HTTP callers send samples inline; no paths on the server are read
    return LambdaQService(base_dir=None, allow_files=False)
