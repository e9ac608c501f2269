__all__ = ("main",)


def main():
    from dampkdv.cli import cli

    cli()


if __name__ == "__main__":
    main()
