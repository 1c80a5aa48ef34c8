from rich.console import Console

console = Console()


def log_check(check_id: str, passed: bool, detail: str = "") -> None:
    status = "[bold green]PASS[/bold green]" if passed else "[bold red]FAIL[/bold red]"
    console.print(f"{status} {check_id} {detail}".rstrip())
